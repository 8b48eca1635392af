#include "orbitlab/experiments.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "orbitlab/bounds.hpp"
#include "orbitlab/invariants.hpp"
#include "orbitlab/recovery.hpp"
#include "orbitlab/sharpness.hpp"

namespace orbitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// config plumbing

void require_object(const Json& j, const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
}

void check_keys(const Json& obj, const std::vector<std::string>& required,
                const std::vector<std::string>& optional, const std::string& ctx) {
    require_object(obj, ctx);
    for (const auto& k : required)
        if (!obj.contains(k)) throw ConfigError(ctx + ": missing key '" + k + "'");
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        bool known = false;
        for (const auto& r : required)
            if (k == r) known = true;
        for (const auto& o : optional)
            if (k == o) known = true;
        if (!known) throw ConfigError(ctx + ": unknown key '" + k + "'");
    }
}

template <typename T>
T get_or(const Json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

std::uint64_t base_seed(const Json& config) { return get_or<std::uint64_t>(config, "seed", 0); }

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < std::min(jobs, n); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Json verdict_json(const Verdict& v) {
    Json j;
    j["scope"] = to_string(v.scope);
    j["ambiguity"] = to_string(v.ambiguity);
    j["margin"] = v.margin;
    j["connected_orbits"] = v.connected_orbits;
    j["dim_v"] = v.dim_v;
    j["orbit_dim"] = v.orbit_dim;
    j["K"] = v.effective;
    j["M"] = v.prior_dim;
    j["class"] = to_string(v.cls);
    j["generic_threshold"] = v.generic_threshold;
    j["all_threshold"] = v.all_threshold;
    return j;
}

Json envelope(std::string experiment, Json config, Json trials, Json aggregates,
              std::chrono::steady_clock::time_point started) {
    Json report;
    report["schema"] = 1;
    report["experiment"] = std::move(experiment);
    report["config"] = std::move(config);
    if (!trials.is_null()) report["trials"] = std::move(trials);
    report["aggregates"] = std::move(aggregates);
    report["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

// ---------------------------------------------------------------------------
// prior descriptors

int prior_declared_dim(const Json& desc) {
    const std::string type = desc.at("type").get<std::string>();
    if (type == "subspace") return desc.at("dim").get<int>();
    if (type == "grid" || type == "point_set") return 0;
    if (type == "two_lines" || type == "ray_circle" || type == "parabola") return 1;
    if (type == "sparse_union") return desc.at("sparsity").get<int>();
    if (type == "relu") return desc.at("latent_dim").get<int>();
    throw ConfigError("prior: unknown type '" + type + "'");
}

void validate_prior_desc(const Json& desc, int ambient) {
    const std::string ctx = "prior";
    require_object(desc, ctx);
    if (!desc.contains("type")) throw ConfigError(ctx + ": missing key 'type'");
    const std::string type = desc.at("type").get<std::string>();
    if (type == "subspace") {
        check_keys(desc, {"type", "dim"}, {}, ctx);
    } else if (type == "grid") {
        check_keys(desc, {"type", "points_per_axis"}, {}, ctx);
    } else if (type == "point_set") {
        check_keys(desc, {"type"}, {"count"}, ctx);
    } else if (type == "two_lines" || type == "parabola" || type == "ray_circle") {
        check_keys(desc, {"type"}, {}, ctx);
        if (ambient != 2) throw ConfigError(ctx + ": '" + type + "' lives in the plane");
    } else if (type == "sparse_union") {
        check_keys(desc, {"type", "sparsity"}, {"dictionary_size"}, ctx);
    } else if (type == "relu") {
        check_keys(desc, {"type", "latent_dim"}, {"hidden"}, ctx);
    } else {
        throw ConfigError(ctx + ": unknown type '" + type + "'");
    }
    if (prior_declared_dim(desc) > ambient)
        throw ConfigError(ctx + ": declared dimension exceeds the ambient dimension");
}

std::shared_ptr<const Prior> make_base_prior(const Json& desc, int ambient, Rng& rng) {
    const std::string type = desc.at("type").get<std::string>();
    if (type == "subspace")
        return std::make_shared<SubspacePrior>(
            random_subspace_basis(ambient, desc.at("dim").get<int>(), rng));
    if (type == "grid")
        return std::make_shared<GridPrior>(desc.at("points_per_axis").get<int>(), ambient);
    if (type == "point_set") {
        const int count = get_or<int>(desc, "count", 1);
        std::vector<Vector> pts;
        for (int i = 0; i < count; ++i) {
            Vector p(ambient);
            for (int j = 0; j < ambient; ++j) p(j) = rng.gaussian();
            pts.push_back(std::move(p));
        }
        return std::make_shared<PointSetPrior>(std::move(pts));
    }
    if (type == "two_lines") {
        const double a1 = rng.uniform(0.0, std::numbers::pi);
        double a2 = rng.uniform(0.0, std::numbers::pi);
        while (std::abs(a1 - a2) < 0.1 || std::abs(std::abs(a1 - a2) - std::numbers::pi) < 0.1)
            a2 = rng.uniform(0.0, std::numbers::pi);
        return std::make_shared<TwoLines2DPrior>(a1, a2);
    }
    if (type == "parabola") return std::make_shared<Parabola2DPrior>();
    if (type == "ray_circle") {
        Vector center(2), origin(2), dir(2);
        center << 0.2, 0.1;
        origin << 1.5, -0.5;
        dir << 0.8, 0.6;
        return std::make_shared<RayCircleUnion2DPrior>(center, 1.0, origin, dir);
    }
    if (type == "sparse_union") {
        const int D = get_or<int>(desc, "dictionary_size", ambient);
        return std::make_shared<SparseUnionPrior>(random_subspace_basis(ambient, D, rng),
                                                  desc.at("sparsity").get<int>());
    }
    if (type == "relu") {
        const int latent = desc.at("latent_dim").get<int>();
        std::vector<int> dims{latent};
        if (desc.contains("hidden"))
            for (const auto& h : desc.at("hidden")) dims.push_back(h.get<int>());
        dims.push_back(ambient);
        std::vector<AffineLayer> layers;
        for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
            Matrix W(dims[i + 1], dims[i]);
            const double scale = 1.0 / std::sqrt(static_cast<double>(dims[i]));
            for (int r = 0; r < W.rows(); ++r)
                for (int c = 0; c < W.cols(); ++c) W(r, c) = scale * rng.gaussian();
            Vector b(dims[i + 1]);
            for (int r = 0; r < b.size(); ++r) b(r) = 0.1 * rng.gaussian();
            layers.push_back(AffineLayer{std::move(W), std::move(b)});
        }
        return std::make_shared<ReluGeneratorPrior>(std::move(layers));
    }
    throw ConfigError("prior: unknown type '" + type + "'");
}

TransformClass transform_class(const std::string& s) {
    if (s == "gl") return TransformClass::GL;
    if (s == "aff") return TransformClass::Aff;
    if (s == "o") return TransformClass::O;
    throw ConfigError("transform: expected one of gl|aff|o, got '" + s + "'");
}

VerdictClass verdict_class(const std::string& s) {
    if (s == "gl") return VerdictClass::GL;
    if (s == "aff") return VerdictClass::Aff;
    if (s == "o") return VerdictClass::O;
    if (s == "u") return VerdictClass::U;
    throw ConfigError("class: expected one of gl|aff|o|u, got '" + s + "'");
}

std::shared_ptr<const Prior> make_prior(const Json& desc, int ambient,
                                        const std::string& transform, Rng& rng) {
    auto base = make_base_prior(desc, ambient, rng);
    if (transform == "none") return base;
    return std::make_shared<TranslatedPrior>(base,
                                             sample_transform(transform_class(transform), ambient, rng));
}

// ---------------------------------------------------------------------------
// ambiguity groups for the transversality experiments

struct AmbiguityGroup {
    RepresentationSpec spec;                // ambient block structure for act()
    std::vector<AmbiguityElement> elements; // empty: use the spec grid search
    int dim_v = 0;
    int orbit_dim = 0;
    bool connected = false;
    std::string kind;
    int delta_steps = 0;
};

Matrix rotation2(double t) {
    Matrix q(2, 2);
    q << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return q;
}

Matrix reflection2(double t) {
    Matrix q(2, 2);
    q << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
    return q;
}

AmbiguityGroup make_ambiguity(const Json& desc) {
    const std::string ctx = "ambiguity";
    require_object(desc, ctx);
    if (!desc.contains("type")) throw ConfigError(ctx + ": missing key 'type'");
    AmbiguityGroup g;
    g.kind = desc.at("type").get<std::string>();
    if (g.kind == "sign_change") {
        check_keys(desc, {"type", "n"}, {}, ctx);
        const int n = desc.at("n").get<int>();
        if (n < 1 || n > 20) throw ConfigError(ctx + ": sign_change n out of range [1, 20]");
        for (int i = 0; i < n; ++i) g.spec.blocks.push_back({1, 1});
        g.elements = sign_change_elements(g.spec);
        g.dim_v = n;
        g.orbit_dim = 0;
        g.connected = false;
        return g;
    }
    if (g.kind == "z4") {
        check_keys(desc, {"type"}, {}, ctx);
        g.spec.blocks.push_back({2, 1});
        for (int k = 0; k < 4; ++k)
            g.elements.push_back(AmbiguityElement{{rotation2(k * std::numbers::pi / 2.0)}});
        g.dim_v = 2;
        g.orbit_dim = 0;
        g.connected = false;
        return g;
    }
    if (g.kind == "so2" || g.kind == "o2") {
        check_keys(desc, {"type"}, {"steps"}, ctx);
        const int steps = get_or<int>(desc, "steps", 2000);
        if (steps < 4 || steps > 2'000'000) throw ConfigError(ctx + ": steps out of range");
        g.spec.blocks.push_back({2, 1});
        for (int k = 0; k < steps; ++k)
            g.elements.push_back(AmbiguityElement{{rotation2(k * kTwoPi / steps)}});
        if (g.kind == "o2")
            for (int k = 0; k < steps; ++k)
                g.elements.push_back(AmbiguityElement{{reflection2(k * kTwoPi / steps)}});
        g.dim_v = 2;
        g.orbit_dim = 1;
        g.connected = true;  // orbits are circles
        g.delta_steps = steps;
        return g;
    }
    if (g.kind == "spec") {
        check_keys(desc, {"type", "blocks"}, {"delta_steps"}, ctx);
        for (const auto& b : desc.at("blocks"))
            g.spec.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
        g.spec.validate();
        const EffectiveDim ed = effective_dim(g.spec);
        g.dim_v = ed.dim_v;
        g.orbit_dim = ed.orbit_dim;
        g.connected = orbits_connected(g.spec);
        g.delta_steps = get_or<int>(desc, "delta_steps", 2000);
        return g;
    }
    throw ConfigError(ctx + ": unknown type '" + g.kind + "'");
}

// ---------------------------------------------------------------------------
// aggregates (shared between report construction and self-consistency checks)

Json aggregate_transversality(const Json& trials) {
    Json agg;
    int run = 0, skipped = 0, nontrivial = 0;
    long long candidates = 0;
    for (const auto& t : trials) {
        if (get_or<bool>(t, "skipped", false)) {
            ++skipped;
            continue;
        }
        ++run;
        if (t.at("nontrivial").get<bool>()) ++nontrivial;
        candidates += t.at("nontrivial_count").get<long long>();
    }
    agg["trials_run"] = run;
    agg["trials_skipped"] = skipped;
    agg["nontrivial_trials"] = nontrivial;
    agg["nontrivial_rate"] = run > 0 ? static_cast<double>(nontrivial) / run : 0.0;
    agg["nontrivial_candidates"] = candidates;
    return agg;
}

Json aggregate_recover_sweep(const Json& trials) {
    Json per_m = Json::object();
    for (const auto& t : trials) {
        const std::string key = std::to_string(t.at("M").get<int>());
        if (!per_m.contains(key)) {
            per_m[key] = Json::object();
            per_m[key]["trials"] = 0;
            per_m[key]["successes"] = 0;
            per_m[key]["errors"] = 0;
        }
        per_m[key]["trials"] = per_m[key]["trials"].get<int>() + 1;
        if (t.at("outcome").get<std::string>() == "success")
            per_m[key]["successes"] = per_m[key]["successes"].get<int>() + 1;
        if (t.at("outcome").get<std::string>() == "error")
            per_m[key]["errors"] = per_m[key]["errors"].get<int>() + 1;
    }
    for (auto& [k, v] : per_m.items()) {
        (void)k;
        v["success_rate"] = v["trials"].get<int>() > 0
                                ? static_cast<double>(v["successes"].get<int>()) /
                                      v["trials"].get<int>()
                                : 0.0;
    }
    Json agg;
    agg["per_M"] = per_m;
    return agg;
}

Json aggregate_separator(const Json& trials) {
    Json agg;
    long long violations = 0, trivial = 0;
    int violating_trials = 0;
    for (const auto& t : trials) {
        const long long v = t.at("violations").get<long long>();
        violations += v;
        trivial += t.at("trivial_fixes").get<long long>();
        if (v > 0) ++violating_trials;
    }
    agg["violations"] = violations;
    agg["violating_trials"] = violating_trials;
    agg["trivial_fixes"] = trivial;
    return agg;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json aggregate_mra(const Json& trials, const std::vector<long long>& n_grid) {
    Json agg;
    Json per_n = Json::array();
    std::vector<double> medians;
    for (long long n : n_grid) {
        std::vector<double> errs;
        for (const auto& t : trials)
            if (t.at("n").get<long long>() == n && t.at("outcome").get<std::string>() == "ok")
                errs.push_back(t.at("error").get<double>());
        const double med = median_of(errs);
        medians.push_back(med);
        Json row;
        row["n"] = n;
        row["median_error"] = med;
        row["trials"] = errs.size();
        per_n.push_back(row);
    }
    bool decreasing = medians.size() >= 2;
    for (std::size_t i = 0; i + 1 < medians.size(); ++i)
        if (!(medians[i + 1] < medians[i])) decreasing = false;
    // least-squares slope of log(median) vs log(n)
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (medians.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < medians.size(); ++i) {
            if (!(medians[i] > 0)) continue;
            const double x = std::log(static_cast<double>(n_grid[i]));
            const double y = std::log(medians[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        if (m >= 2) slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    agg["per_n"] = per_n;
    agg["strictly_decreasing"] = decreasing;
    agg["loglog_slope"] = slope;
    return agg;
}

// ---------------------------------------------------------------------------

std::string scope_key(const Json& config, const std::string& key, const std::string& fallback) {
    return get_or<std::string>(config, key, fallback);
}

} // namespace

// ---------------------------------------------------------------------------
// bounds

Json run_bounds(const Json& config) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config, {"schema", "experiment", "family", "M", "class"}, {"connected", "seed"},
               "bounds");
    const Json& family = config.at("family");
    require_object(family, "bounds.family");
    const std::string type = family.at("type").get<std::string>();
    const int M = config.at("M").get<int>();
    const VerdictClass cls = verdict_class(config.at("class").get<std::string>());

    Json agg;
    if (type == "spec" || type == "complex_spec") {
        check_keys(family, {"type", "blocks"}, {}, "bounds.family");
        RepresentationSpec spec;
        for (const auto& b : family.at("blocks"))
            spec.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
        if (type == "complex_spec") {
            agg["verdict"] = verdict_json(verdict_complex(spec, M, cls));
        } else if (config.contains("connected")) {
            agg["verdict"] =
                verdict_json(verdict_real(spec, M, cls, config.at("connected").get<bool>()));
        } else {
            agg["verdict"] = verdict_json(verdict_real(spec, M, cls));
        }
    } else if (type == "cryoem") {
        check_keys(family, {"type", "L", "R"}, {}, "bounds.family");
        const CryoemVerdict cv =
            verdict_cryoem(family.at("L").get<int>(), family.at("R").get<int>(), M, cls);
        agg["verdict"] = verdict_json(cv.verdict);
        agg["closed_form"] = cv.closed_form;
        agg["closed_form_K"] = cv.closed_form_k;
    } else if (type == "dihedral") {
        check_keys(family, {"type", "N"}, {}, "bounds.family");
        agg["verdict"] =
            verdict_json(verdict_real(dihedral_decomposition(family.at("N").get<int>()), M, cls));
    } else if (type == "gram") {
        check_keys(family, {"type", "N", "R"}, {}, "bounds.family");
        agg["verdict"] =
            verdict_json(verdict_gram(family.at("N").get<int>(), family.at("R").get<int>(), M, cls));
    } else if (type == "phase_retrieval") {
        check_keys(family, {"type", "N"}, {}, "bounds.family");
        agg["verdict"] = verdict_json(verdict_phase_retrieval(family.at("N").get<int>(), M, cls));
    } else if (type == "rowsort") {
        check_keys(family, {"type", "d", "n"}, {}, "bounds.family");
        const RowsortVerdict rv =
            verdict_rowsort(family.at("d").get<int>(), family.at("n").get<int>(), M);
        Json j;
        j["separating_all"] = rv.separating_all;
        j["separating_generic"] = rv.separating_generic;
        j["ambient"] = rv.ambient;
        j["M"] = rv.prior_dim;
        agg["verdict"] = j;
    } else {
        throw ConfigError("bounds.family: unknown type '" + type + "'");
    }
    return envelope("bounds", config, Json(), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// transversality

namespace {

struct ProbeOutcome {
    bool attempted = false;
    bool found = false;
    double residual = std::numeric_limits<double>::infinity();
    Vector witness;
    std::string element;
};

/// Looks for a point of the translated circle whose sign-flipped copy also
/// lies in the translated prior: the coincidence points of the figure-style
/// ray-and-circle scenario.
ProbeOutcome targeted_probe(const TranslatedPrior& prior, double tol_sep, bool allow_sign) {
    ProbeOutcome out;
    const auto* base = dynamic_cast<const RayCircleUnion2DPrior*>(&prior.base());
    if (!base) return out;
    out.attempted = true;
    const auto& T = prior.transform();
    const Vector c = base->circle_center();
    const double r = base->circle_radius();
    const std::array<std::array<double, 2>, 3> flips = {{{-1, 1}, {1, -1}, {-1, -1}}};
    for (const auto& f : flips) {
        auto point = [&](double t) {
            Vector p(2);
            p << c(0) + r * std::cos(t), c(1) + r * std::sin(t);
            return Vector(T.apply(p));
        };
        auto flipped_distance = [&](double t) {
            Vector w = point(t);
            w(0) *= f[0];
            w(1) *= f[1];
            return prior.project(w).distance;
        };
        const int scan = 8192;
        double best_t = 0, best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < scan; ++i) {
            const double t = i * kTwoPi / scan;
            const double d = flipped_distance(t);
            if (d < best_d) {
                best_d = d;
                best_t = t;
            }
        }
        double a = best_t - kTwoPi / scan, b = best_t + kTwoPi / scan;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = flipped_distance(x1), f2 = flipped_distance(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = flipped_distance(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = flipped_distance(x2);
            }
        }
        const double t = 0.5 * (a + b);
        const Vector v = point(t);
        Vector w = v;
        w(0) *= f[0];
        w(1) *= f[1];
        const double d = prior.project(w).distance;
        double sep = (w - v).norm();
        if (allow_sign) sep = std::min(sep, (w + v).norm());
        if (d < out.residual && sep > tol_sep * std::max(1.0, v.norm())) {
            out.residual = d;
            out.witness = v;
            out.element = std::string(f[0] > 0 ? "+" : "-") + (f[1] > 0 ? "+" : "-");
            out.found = d <= 1e-6 * std::max(1.0, v.norm());
        }
    }
    return out;
}

} // namespace

Json run_transversality(const Json& config, int jobs) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config,
               {"schema", "experiment", "seed", "trials", "ambiguity", "prior", "transform"},
               {"tol_in", "tol_sep", "min_norm", "targeted_probe", "budget", "jobs"},
               "transversality");
    const int trials = config.at("trials").get<int>();
    if (trials < 1) throw ConfigError("transversality: trials must be >= 1");
    const std::string transform = config.at("transform").get<std::string>();
    const AmbiguityGroup amb = make_ambiguity(config.at("ambiguity"));
    const int ambient = amb.spec.dim();
    validate_prior_desc(config.at("prior"), ambient);
    const double tol_in = get_or<double>(config, "tol_in", 1e-6);
    const double tol_sep = get_or<double>(config, "tol_sep", 1e-3);
    const double min_norm = get_or<double>(config, "min_norm", 0.0);
    const double budget = get_or<double>(config, "budget", 1e8);
    const bool allow_sign = transform != "aff";
    const std::uint64_t seed = base_seed(config);

    std::vector<Json> records(trials);
    parallel_for(trials, jobs, [&](int i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        Json rec;
        rec["index"] = i;
        rec["seed"] = rng.seed();
        auto prior = make_prior(config.at("prior"), ambient, transform, rng);
        Vector x;
        int attempts = 0;
        do {
            x = prior->sample(rng);
        } while (x.norm() < min_norm && ++attempts < 1000);
        const Signal xs = Signal::unflatten(amb.spec, x);
        rec["x_norm"] = x.norm();
        long long nontrivial = 0, trivial = 0;
        double worst = std::numeric_limits<double>::infinity();
        try {
            if (!amb.elements.empty()) {
                for (const auto& h : amb.elements) {
                    const Signal v = act(h, xs);
                    const double d = prior->project(v.flatten()).distance;
                    if (d <= tol_in) {
                        if (same_up_to_sign(v, xs, tol_sep, allow_sign))
                            ++trivial;
                        else {
                            ++nontrivial;
                            worst = std::min(worst, d);
                        }
                    }
                }
            } else {
                GridOptions go;
                go.delta = kTwoPi / amb.delta_steps;
                go.budget = budget;
                go.search.tol_in = tol_in;
                go.search.tol_sep = tol_sep;
                go.search.allow_sign = allow_sign;
                const RecoveryResult res = orbit_search_grid(xs, *prior, go);
                for (const auto& cand : res.candidates) {
                    if (same_up_to_sign(cand.signal, xs, tol_sep, allow_sign))
                        ++trivial;
                    else {
                        ++nontrivial;
                        worst = std::min(worst, cand.residual);
                    }
                }
            }
        } catch (const GridBudgetError& e) {
            rec["skipped"] = true;
            rec["note"] = e.what();
            records[i] = std::move(rec);
            return;
        }
        rec["nontrivial"] = nontrivial > 0;
        rec["nontrivial_count"] = nontrivial;
        rec["trivial_count"] = trivial;
        records[i] = std::move(rec);
    });

    Json trials_json = Json::array();
    for (auto& r : records) trials_json.push_back(std::move(r));
    Json agg = aggregate_transversality(trials_json);
    agg["verdict"] = verdict_json(verdict_from_dims(
        amb.dim_v, amb.orbit_dim, prior_declared_dim(config.at("prior")),
        transform == "aff" ? VerdictClass::Aff
                           : (transform == "gl" ? VerdictClass::GL : VerdictClass::O),
        amb.connected));

    if (get_or<bool>(config, "targeted_probe", false)) {
        Rng rng = Rng::stream(seed, 0x50524f42ull);  // independent probe stream
        auto prior = make_prior(config.at("prior"), ambient, transform, rng);
        const auto* tp = dynamic_cast<const TranslatedPrior*>(prior.get());
        Json pj;
        pj["attempted"] = false;
        if (tp) {
            const ProbeOutcome probe = targeted_probe(*tp, tol_sep, allow_sign);
            pj["attempted"] = probe.attempted;
            pj["found"] = probe.found;
            if (probe.attempted) {
                pj["residual"] = probe.residual;
                if (probe.found) {
                    pj["witness"] = {probe.witness(0), probe.witness(1)};
                    pj["element"] = probe.element;
                }
            }
        }
        agg["targeted_probe"] = pj;
    }
    return envelope("transversality", config, std::move(trials_json), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// sharpness

Json run_sharpness(const Json& config) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config, {"schema", "experiment", "case"}, {"seed", "trials", "grid_steps", "jobs"},
               "sharpness");
    const std::string which = config.at("case").get<std::string>();
    const int trials = get_or<int>(config, "trials", 100);
    Rng rng(base_seed(config));
    Json agg;
    if (which == "parabola_gl" || which == "parabola_aff") {
        const ParabolaSharpnessResult res = parabola_sharpness(which == "parabola_aff", trials, rng);
        agg["seed_points_on_curve"] = res.seed_points_on_curve;
        agg["trials"] = res.trials;
        agg["persisted"] = res.persisted;
        agg["identity_checks"] = res.identity_checks;
        agg["sample_pairs"] = res.sample_pairs;
    } else if (which == "z4_grid") {
        const Z4SharpnessResult res = z4_sharpness(trials, rng);
        agg["trials"] = res.trials;
        agg["single_orbit"] = res.single_orbit;
    } else if (which == "so2_points") {
        const SO2SharpnessResult res =
            so2_sharpness(trials, get_or<int>(config, "grid_steps", 2000), rng);
        agg["trials"] = res.trials;
        agg["common_orbit"] = res.common_orbit;
        agg["tol"] = res.tol;
    } else {
        throw ConfigError("sharpness: unknown case '" + which + "'");
    }
    return envelope("sharpness", config, Json(), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// recover-sweep

Json run_recover_sweep(const Json& config, int jobs) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config,
               {"schema", "experiment", "seed", "trials", "family", "prior", "dims", "transform",
                "method"},
               {"delta_steps", "budget", "tol_in", "tol_sep", "success_tol", "restarts", "iters",
                "jobs"},
               "recover-sweep");
    const Json& family = config.at("family");
    RepresentationSpec spec;
    const std::string ftype = family.at("type").get<std::string>();
    if (ftype == "dihedral") {
        check_keys(family, {"type", "N"}, {}, "recover-sweep.family");
        spec = dihedral_decomposition(family.at("N").get<int>());
    } else if (ftype == "signs") {
        check_keys(family, {"type", "n"}, {}, "recover-sweep.family");
        for (int i = 0; i < family.at("n").get<int>(); ++i) spec.blocks.push_back({1, 1});
    } else if (ftype == "spec") {
        check_keys(family, {"type", "blocks"}, {}, "recover-sweep.family");
        for (const auto& b : family.at("blocks"))
            spec.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
        spec.validate();
    } else {
        throw ConfigError("recover-sweep.family: unknown type '" + ftype + "'");
    }
    const std::string prior_type = config.at("prior").at("type").get<std::string>();
    if (prior_type != "subspace" && prior_type != "point_set")
        throw ConfigError("recover-sweep: prior must be subspace or point_set");
    const std::vector<int> dims = config.at("dims").get<std::vector<int>>();
    const int trials = config.at("trials").get<int>();
    const std::string transform = config.at("transform").get<std::string>();
    const std::string method_name = config.at("method").get<std::string>();
    const double success_tol = get_or<double>(config, "success_tol", 1e-6);
    const std::uint64_t seed = base_seed(config);

    RecoverConfig rc;
    if (method_name == "enumerate")
        rc.method = RecoveryMethod::enumerate;
    else if (method_name == "grid")
        rc.method = RecoveryMethod::grid;
    else if (method_name == "local")
        rc.method = RecoveryMethod::local;
    else
        throw ConfigError("recover-sweep: unknown method '" + method_name + "'");
    rc.grid.delta = kTwoPi / get_or<int>(config, "delta_steps", 2000);
    rc.grid.budget = get_or<double>(config, "budget", 1e8);
    rc.grid.search.tol_in = get_or<double>(config, "tol_in", 1e-6);
    rc.grid.search.tol_sep = get_or<double>(config, "tol_sep", 1e-3);
    rc.local.search = rc.grid.search;
    rc.local.restarts = get_or<int>(config, "restarts", 64);
    rc.local.max_iters = get_or<int>(config, "iters", 500);
    rc.enumerate_opts = rc.grid.search;

    const int total = static_cast<int>(dims.size()) * trials;
    std::vector<Json> records(total);
    parallel_for(total, jobs, [&](int task) {
        const int mi = task / trials;
        const int t = task % trials;
        const int M = dims[mi];
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(task));
        Json rec;
        rec["index"] = task;
        rec["M"] = M;
        rec["trial"] = t;
        rec["seed"] = rng.seed();
        Json pdesc = config.at("prior");
        if (pdesc.at("type") == "subspace") pdesc["dim"] = M;
        auto prior = make_prior(pdesc, spec.dim(), transform, rng);
        Vector x;
        do {
            x = prior->sample(rng);
        } while (x.norm() < 1e-3);
        const Signal xs = Signal::unflatten(spec, x);
        RecoverConfig cfg = rc;
        cfg.seed = derive_seed(rng.seed(), 1);
        try {
            const RecoveryResult res = recover(gram_blocks(xs), *prior, cfg);
            rec["status"] = to_string(res.status);
            rec["scanned"] = res.points_scanned;
            double err = std::numeric_limits<double>::infinity();
            if (!res.candidates.empty()) {
                const Vector c = res.candidates.front().signal.flatten();
                err = std::min((c - x).norm(), (c + x).norm()) / std::max(1e-12, x.norm());
                rec["gram_error"] = res.candidates.front().gram_error;
            }
            rec["error"] = err;
            const bool success =
                res.status == RecoveryStatus::unique_up_to_sign && err <= success_tol;
            rec["outcome"] = success ? "success" : "failure";
        } catch (const GridBudgetError& e) {
            rec["outcome"] = "error";
            rec["note"] = e.what();
        } catch (const InfeasibleGramError& e) {
            rec["outcome"] = "error";
            rec["note"] = e.what();
        }
        records[task] = std::move(rec);
    });

    Json trials_json = Json::array();
    for (auto& r : records) trials_json.push_back(std::move(r));
    Json agg = aggregate_recover_sweep(trials_json);
    Json verdicts = Json::object();
    for (int M : dims) {
        const VerdictClass cls = verdict_class(transform);
        verdicts[std::to_string(M)] = verdict_json(verdict_real(spec, M, cls));
    }
    agg["verdicts"] = verdicts;
    return envelope("recover-sweep", config, std::move(trials_json), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// separator

Json run_separator(const Json& config, int jobs) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config, {"schema", "experiment", "seed", "trials", "d", "n", "prior", "transform"},
               {"tol_in", "tol_sep", "witness", "jobs"}, "separator");
    const int d = config.at("d").get<int>();
    const int n = config.at("n").get<int>();
    if (d < 1 || n < 1) throw ConfigError("separator: d and n must be >= 1");
    double tuple_count = 1.0;
    double nf = 1.0;
    for (int i = 2; i <= n; ++i) nf *= i;
    for (int i = 0; i < d; ++i) tuple_count *= nf;
    if (tuple_count > 1e6)
        throw GridBudgetError("separator: (n!)^d = " + std::to_string(tuple_count) +
                              " exceeds the enumeration budget of 1e6");
    const int trials = config.at("trials").get<int>();
    const int ambient = d * n;
    const bool witness = get_or<bool>(config, "witness", false);
    const std::string transform = witness ? "none" : config.at("transform").get<std::string>();
    if (!witness) validate_prior_desc(config.at("prior"), ambient);
    const double tol_in = get_or<double>(config, "tol_in", 1e-6);
    const double tol_sep = get_or<double>(config, "tol_sep", 1e-9);
    const std::uint64_t seed = base_seed(config);

    // all permutations of {0..n-1}
    std::vector<std::vector<int>> perms;
    {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }

    std::vector<Json> records(trials);
    parallel_for(trials, jobs, [&](int i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        Json rec;
        rec["index"] = i;
        rec["seed"] = rng.seed();
        std::shared_ptr<const Prior> prior;
        if (witness) {
            // rows equal and supported on the first two columns: independent
            // row permutations that swap those columns stay inside the set
            Matrix basis = Matrix::Zero(ambient, 2);
            for (int r = 0; r < d; ++r) {
                basis(r * n + 0, 0) = 1.0;
                basis(r * n + 1, 1) = 1.0;
            }
            prior = std::make_shared<SubspacePrior>(basis);
        } else {
            prior = make_prior(config.at("prior"), ambient, transform, rng);
        }
        Vector x;
        do {
            x = prior->sample(rng);
        } while (x.norm() < 1e-3);
        long long violations = 0, trivial = 0, members = 0, diagonal_violations = 0;
        std::vector<std::size_t> idx(d, 0);
        Vector y(ambient);
        for (;;) {
            for (int r = 0; r < d; ++r)
                for (int j = 0; j < n; ++j) y(r * n + j) = x(r * n + perms[idx[r]][j]);
            const double dist = prior->project(y).distance;
            if (dist <= tol_in) {
                ++members;
                if ((y - x).norm() <= tol_sep * std::max(1.0, x.norm())) {
                    ++trivial;
                } else {
                    ++violations;
                    bool diag = true;
                    for (int r = 1; r < d; ++r)
                        if (idx[r] != idx[0]) diag = false;
                    if (diag) ++diagonal_violations;
                }
            }
            int r = 0;
            for (; r < d; ++r) {
                if (++idx[r] < perms.size()) break;
                idx[r] = 0;
            }
            if (r == d) break;
        }
        rec["violations"] = violations;
        rec["diagonal_violations"] = diagonal_violations;
        rec["trivial_fixes"] = trivial;
        rec["members"] = members;
        records[i] = std::move(rec);
    });

    Json trials_json = Json::array();
    for (auto& r : records) trials_json.push_back(std::move(r));
    Json agg = aggregate_separator(trials_json);
    const int M = witness ? 2 : prior_declared_dim(config.at("prior"));
    const RowsortVerdict rv = verdict_rowsort(d, n, M);
    Json vj;
    vj["separating_all"] = rv.separating_all;
    vj["separating_generic"] = rv.separating_generic;
    vj["ambient"] = rv.ambient;
    vj["M"] = rv.prior_dim;
    agg["verdict"] = vj;
    return envelope("separator", config, std::move(trials_json), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// mra-noise

Json run_mra_noise(const Json& config, int jobs) {
    const auto started = std::chrono::steady_clock::now();
    check_keys(config,
               {"schema", "experiment", "seed", "seeds", "group", "prior", "transform", "sigma",
                "n_grid"},
               {"delta_steps", "budget", "tol_sep", "jobs"}, "mra-noise");
    const Json& gdesc = config.at("group");
    check_keys(gdesc, {"type", "N"}, {}, "mra-noise.group");
    const std::string gtype = gdesc.at("type").get<std::string>();
    const int N = gdesc.at("N").get<int>();
    DataGroupSpec G = gtype == "cyclic" ? DataGroupSpec(CyclicGroup{N})
                      : gtype == "dihedral"
                          ? DataGroupSpec(DihedralGroup{N})
                          : throw ConfigError("mra-noise.group: type must be cyclic or dihedral");
    const RepresentationSpec spec = isotypic_spec(G);
    const Matrix P = isotypic_basis(G);
    const double sigma = config.at("sigma").get<double>();
    if (sigma < 0) throw ConfigError("mra-noise: sigma must be >= 0");
    const std::vector<long long> n_grid = config.at("n_grid").get<std::vector<long long>>();
    const int seeds = config.at("seeds").get<int>();
    const std::string transform = config.at("transform").get<std::string>();
    validate_prior_desc(config.at("prior"), N);
    const std::uint64_t seed = base_seed(config);

    const int total = seeds * static_cast<int>(n_grid.size());
    std::vector<Json> records(total);
    parallel_for(total, jobs, [&](int task) {
        const int s = task / static_cast<int>(n_grid.size());
        const int j = task % static_cast<int>(n_grid.size());
        const long long nsamples = n_grid[j];
        // the instance (prior, x) is fixed per seed index across the n grid
        Rng instance_rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
        auto prior = make_prior(config.at("prior"), N, transform, instance_rng);
        Vector x_coef;
        do {
            x_coef = prior->sample(instance_rng);
        } while (x_coef.norm() < 0.5);
        const Vector x_ambient = P * x_coef;
        Rng noise_rng = Rng::stream(seed, (static_cast<std::uint64_t>(s + 1) << 20) + j);

        Json rec;
        rec["index"] = task;
        rec["seed_index"] = s;
        rec["n"] = nsamples;
        rec["sigma"] = sigma;
        try {
            const SecondMomentEstimate est =
                empirical_second_moment(G, x_ambient, nsamples, sigma, noise_rng);
            const GramBlocks gram = second_moment_to_gram(G, est);
            double trace = 0.0;
            for (const auto& b : gram.blocks) trace += std::max(0.0, b.trace());
            const double scale = std::sqrt(trace);

            RecoverConfig rc;
            rc.method = RecoveryMethod::grid;
            rc.grid.delta = kTwoPi / get_or<int>(config, "delta_steps", 2000);
            rc.grid.budget = get_or<double>(config, "budget", 1e8);
            rc.grid.search.tol_in = std::max(1e-6, 0.9 * scale);
            rc.grid.search.tol_sep = get_or<double>(config, "tol_sep", 1e-3);
            rc.seed = derive_seed(noise_rng.seed(), 7);
            const RecoveryResult res = recover(gram, *prior, rc);
            if (res.candidates.empty()) {
                rec["outcome"] = "not_found";
                rec["error"] = std::numeric_limits<double>::quiet_NaN();
            } else {
                const Vector c = res.candidates.front().signal.flatten();
                const double err =
                    std::min((c - x_coef).norm(), (c + x_coef).norm()) / x_coef.norm();
                rec["outcome"] = "ok";
                rec["error"] = err;
                rec["residual"] = res.candidates.front().residual;
                rec["status"] = to_string(res.status);
            }
        } catch (const GridBudgetError& e) {
            rec["outcome"] = "error";
            rec["note"] = e.what();
        } catch (const InfeasibleGramError& e) {
            rec["outcome"] = "error";
            rec["note"] = e.what();
        }
        records[task] = std::move(rec);
    });

    Json trials_json = Json::array();
    for (auto& r : records) trials_json.push_back(std::move(r));
    Json agg = aggregate_mra(trials_json, n_grid);
    return envelope("mra-noise", config, std::move(trials_json), std::move(agg), started);
}

// ---------------------------------------------------------------------------
// dispatch, CSV, CLI

Json run_experiment(const Json& config, int jobs) {
    try {
        require_object(config, "config");
        if (!config.contains("schema") || config.at("schema").get<int>() != 1)
            throw ConfigError("config: schema must be 1");
        if (!config.contains("experiment")) throw ConfigError("config: missing key 'experiment'");
        const std::string exp = config.at("experiment").get<std::string>();
        if (config.contains("jobs")) jobs = config.at("jobs").get<int>();
        if (exp == "bounds") return run_bounds(config);
        if (exp == "transversality") return run_transversality(config, jobs);
        if (exp == "sharpness") return run_sharpness(config);
        if (exp == "recover-sweep") return run_recover_sweep(config, jobs);
        if (exp == "separator") return run_separator(config, jobs);
        if (exp == "mra-noise") return run_mra_noise(config, jobs);
        throw ConfigError("config: unknown experiment '" + exp + "'");
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::string report_to_csv(const Json& report) {
    std::ostringstream out;
    if (!report.contains("trials") || report.at("trials").empty()) {
        out << "experiment\n" << report.at("experiment").get<std::string>() << "\n";
        return out.str();
    }
    const Json& trials = report.at("trials");
    std::vector<std::string> columns;
    for (const auto& t : trials)
        for (const auto& [k, v] : t.items()) {
            (void)v;
            if (std::find(columns.begin(), columns.end(), k) == columns.end())
                columns.push_back(k);
        }
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& t : trials) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (t.contains(columns[i])) {
                const Json& v = t.at(columns[i]);
                if (v.is_string())
                    out << v.get<std::string>();
                else
                    out << v.dump();
            }
            out << (i + 1 < columns.size() ? "," : "\n");
        }
    }
    return out.str();
}

int cli_main(int argc, char** argv) {
    CLI::App app{"orbitlab: recoverability bounds and orbit-recovery experiments"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "json";
    std::int64_t seed_override = -1;
    int jobs = 1;
    const std::vector<std::string> names = {"bounds",        "transversality", "sharpness",
                                            "recover-sweep", "separator",      "mra-noise"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file '" << config_path << "'\n";
            return 2;
        }
        Json config;
        try {
            config = Json::parse(in);
        } catch (const Json::exception& e) {
            std::cerr << "error: config parse failure: " << e.what() << "\n";
            return 2;
        }
        if (config.contains("experiment") &&
            config.at("experiment").get<std::string>() != sub) {
            std::cerr << "error: config experiment '" << config.at("experiment").get<std::string>()
                      << "' does not match subcommand '" << sub << "'\n";
            return 2;
        }
        config["experiment"] = sub;
        if (!config.contains("schema")) config["schema"] = 1;
        if (seed_override >= 0) config["seed"] = static_cast<std::uint64_t>(seed_override);

        const Json report = run_experiment(config, jobs);
        const std::string text = format == "csv" ? report_to_csv(report) : report.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "error: cannot write '" << out_path << "'\n";
                return 1;
            }
            out << text;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const GridBudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleGramError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace orbitlab
