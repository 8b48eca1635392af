#include "orbitlab/recovery.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace orbitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

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

/// Orthonormalize with the R-diagonal sign convention (a retraction).
Matrix retract_orthogonal(const Matrix& A) {
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < Q.cols(); ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

/// Orthogonal Procrustes: Q minimizing |Q S - T|_F.
Matrix procrustes(const Matrix& S, const Matrix& T) {
    Eigen::JacobiSVD<Matrix> svd(T * S.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

struct DescentResult {
    AmbiguityElement element;
    Signal signal;
    double distance = std::numeric_limits<double>::infinity();
};

/// Riemannian descent of f(h) = dist(prior, h.xhat)^2 from a given start.
/// The accepted step size carries over between iterations.
DescentResult descend(const Signal& xhat, const Prior& prior, AmbiguityElement h, int max_iters,
                      int patience) {
    Signal v = act(h, xhat);
    Projection proj = prior.project(v.flatten());
    double f = proj.distance * proj.distance;
    double best_f = f;
    int stall = 0;
    double step = 1.0;
    const std::size_t L = h.factors.size();

    for (int it = 0; it < max_iters && f > 1e-26; ++it) {
        // Euclidean gradient per factor: 2 D_l X_l^T with D = v - projection
        const Signal residual = Signal::unflatten(xhat.spec, v.flatten() - proj.point);
        std::vector<Matrix> tangent(L);
        double tangent_norm2 = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const Matrix G = 2.0 * residual.blocks[l] * xhat.blocks[l].transpose();
            const Matrix A = h.factors[l].transpose() * G;
            tangent[l] = 0.5 * (A - A.transpose());
            tangent_norm2 += tangent[l].squaredNorm();
        }
        if (tangent_norm2 < 1e-30) break;

        step = std::min(step * 2.0, 1e3);
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            AmbiguityElement trial = h;
            for (std::size_t l = 0; l < L; ++l)
                if (trial.factors[l].rows() > 1)
                    trial.factors[l] =
                        retract_orthogonal(h.factors[l] - step * h.factors[l] * tangent[l]);
            const Signal tv = act(trial, xhat);
            const Projection tp = prior.project(tv.flatten());
            const double tf = tp.distance * tp.distance;
            if (tf < f) {
                h = trial;
                v = tv;
                proj = tp;
                f = tf;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        if (f < best_f * (1.0 - 1e-12)) {
            best_f = f;
            stall = 0;
        } else if (++stall > patience) {
            break;
        }
    }
    return DescentResult{std::move(h), std::move(v), std::sqrt(f)};
}

/// Online clustering of candidates up to global sign. Representatives keep
/// their insertion order until take() sorts them by residual.
class CandidateClusters {
public:
    CandidateClusters(double tol_sep, bool allow_sign, std::size_t max_clusters)
        : tol_sep_(tol_sep), allow_sign_(allow_sign), max_clusters_(max_clusters) {}

    /// Returns true when the candidate replaced an existing representative.
    bool add(Signal sig, double residual) {
        ++raw_;
        best_residual_ = std::min(best_residual_, residual);
        for (std::size_t i = 0; i < reps_.size(); ++i) {
            if (same_up_to_sign(reps_[i].signal, sig, tol_sep_, allow_sign_)) {
                last_cluster_ = i;
                if (residual < reps_[i].residual) {
                    reps_[i].signal = std::move(sig);
                    reps_[i].residual = residual;
                    return true;
                }
                return false;
            }
        }
        if (reps_.size() < max_clusters_) {
            last_cluster_ = reps_.size();
            reps_.push_back(RecoveryCandidate{std::move(sig), residual, 0.0});
        } else {
            ++overflow_;
            last_cluster_ = static_cast<std::size_t>(-1);
        }
        return false;
    }

    std::vector<RecoveryCandidate> take() {
        std::sort(reps_.begin(), reps_.end(),
                  [](const auto& a, const auto& b) { return a.residual < b.residual; });
        return std::move(reps_);
    }

    long long raw() const { return raw_; }
    long long overflow() const { return overflow_; }
    double best_residual() const { return best_residual_; }
    std::size_t cluster_count() const { return reps_.size(); }
    std::size_t last_cluster() const { return last_cluster_; }

private:
    double tol_sep_;
    bool allow_sign_;
    std::size_t max_clusters_;
    std::vector<RecoveryCandidate> reps_;
    long long raw_ = 0;
    long long overflow_ = 0;
    double best_residual_ = std::numeric_limits<double>::infinity();
    std::size_t last_cluster_ = static_cast<std::size_t>(-1);
};

RecoveryStatus status_from_clusters(const CandidateClusters& clusters) {
    if (clusters.raw() == 0) return RecoveryStatus::not_found;
    if (clusters.cluster_count() == 1 && clusters.overflow() == 0)
        return RecoveryStatus::unique_up_to_sign;
    return RecoveryStatus::ambiguous;
}

} // namespace

std::string to_string(RecoveryStatus s) {
    switch (s) {
        case RecoveryStatus::unique_up_to_sign: return "unique_up_to_sign";
        case RecoveryStatus::ambiguous: return "ambiguous";
        case RecoveryStatus::not_found: return "not_found";
    }
    return "?";
}

std::string to_string(RecoveryMethod m) {
    switch (m) {
        case RecoveryMethod::enumerate: return "enumerate";
        case RecoveryMethod::grid: return "grid";
        case RecoveryMethod::local: return "local";
    }
    return "?";
}

bool same_up_to_sign(const Signal& x, const Signal& y, double tol, bool allow_sign) {
    const Vector a = x.flatten();
    const Vector b = y.flatten();
    const double scale = std::max(1.0, a.norm());
    double d = (a - b).norm();
    if (allow_sign) d = std::min(d, (a + b).norm());
    return d <= tol * scale;
}

Signal canonical_factor(const GramBlocks& gram) {
    Signal out{gram.spec, {}};
    for (std::size_t l = 0; l < gram.blocks.size(); ++l) {
        const Matrix& B = gram.blocks[l];
        const int nl = gram.spec.blocks[l].irrep_dim;
        const int rl = gram.spec.blocks[l].multiplicity;
        if (B.rows() != rl || B.cols() != rl)
            throw std::invalid_argument("canonical_factor: block shape mismatch");
        Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (B + B.transpose()));
        const Vector vals = eig.eigenvalues();  // ascending
        const double scale = vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0;
        const double cut = 1e-10 * scale;
        int rank = 0;
        for (int i = 0; i < vals.size(); ++i)
            if (vals(i) > cut) ++rank;
        if (rank > nl)
            throw InfeasibleGramError("canonical_factor: block " + std::to_string(l) + " has rank " +
                                      std::to_string(rank) + " > irreducible dimension " +
                                      std::to_string(nl));
        Matrix X = Matrix::Zero(nl, rl);
        // descending eigenvalues; eigenvector signs fixed so the first
        // nonzero component is positive
        for (int i = 0; i < rank; ++i) {
            const int src = static_cast<int>(vals.size()) - 1 - i;
            Vector u = eig.eigenvectors().col(src);
            const double umax = u.cwiseAbs().maxCoeff();
            for (int j = 0; j < u.size(); ++j) {
                if (std::abs(u(j)) > 1e-12 * umax) {
                    if (u(j) < 0) u = -u;
                    break;
                }
            }
            X.row(i) = std::sqrt(std::max(vals(src), 0.0)) * u.transpose();
        }
        out.blocks.push_back(std::move(X));
    }
    return out;
}

RecoveryResult orbit_search_enumerate(const std::vector<AmbiguityElement>& elements,
                                      const Signal& xhat, const Prior& prior,
                                      const SearchOptions& opts) {
    if (elements.empty())
        throw std::invalid_argument("orbit_search_enumerate: empty element list");
    RecoveryResult result;
    result.method = RecoveryMethod::enumerate;
    CandidateClusters clusters(opts.tol_sep, opts.allow_sign, opts.max_clusters);
    for (const auto& h : elements) {
        Signal v = act(h, xhat);
        const Projection p = prior.project(v.flatten());
        ++result.points_scanned;
        if (p.distance <= opts.tol_in) clusters.add(std::move(v), p.distance);
    }
    result.raw_candidates = clusters.raw();
    result.best_residual = clusters.best_residual();
    result.status = status_from_clusters(clusters);
    result.candidates = clusters.take();
    return result;
}

std::vector<AmbiguityElement> sign_change_elements(const RepresentationSpec& spec,
                                                   std::uint64_t cap) {
    for (const auto& b : spec.blocks)
        if (b.irrep_dim != 1)
            throw std::invalid_argument("sign_change_elements: spec has a block of dimension > 1");
    const std::size_t L = spec.blocks.size();
    if (L >= 63 || (1ull << L) > cap)
        throw std::invalid_argument("sign_change_elements: too many factors");
    std::vector<AmbiguityElement> out;
    out.reserve(1ull << L);
    for (std::uint64_t mask = 0; mask < (1ull << L); ++mask) {
        AmbiguityElement h;
        for (std::size_t l = 0; l < L; ++l)
            h.factors.push_back(Matrix::Constant(1, 1, (mask >> l) & 1 ? -1.0 : 1.0));
        out.push_back(std::move(h));
    }
    return out;
}

namespace {

/// Exhaustive product-grid scan (grid size within budget).
RecoveryResult grid_scan_product(const Signal& xhat, const Prior& prior, const GridOptions& opts,
                                 long long total_size) {
    const auto& spec = xhat.spec;
    const std::size_t L = spec.blocks.size();
    std::vector<std::vector<Matrix>> factor_elems(L);
    int two_dim_blocks = 0;
    for (std::size_t l = 0; l < L; ++l) {
        if (spec.blocks[l].irrep_dim == 1) {
            factor_elems[l] = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -1.0)};
        } else {
            ++two_dim_blocks;
            const int steps = static_cast<int>(std::ceil(kTwoPi / opts.delta));
            auto& elems = factor_elems[l];
            elems.reserve(2 * steps);
            for (int k = 0; k < steps; ++k) elems.push_back(rotation2(k * opts.delta));
            for (int k = 0; k < steps; ++k) elems.push_back(reflection2(k * opts.delta));
        }
    }
    // any true intersection is within this Lipschitz radius of a grid point
    double step_move = 0.0;  // signal displacement per unit angle step
    for (std::size_t l = 0; l < L; ++l)
        if (spec.blocks[l].irrep_dim == 2) step_move += xhat.blocks[l].norm();
    const double inflation = two_dim_blocks * opts.delta * xhat.norm();
    const double capture_tol = opts.search.tol_in + inflation;

    RecoveryResult result;
    result.method = RecoveryMethod::grid;

    if (!opts.search.polish) {
        // raw semantics: admit at the inflated tolerance, cluster at tol_sep
        CandidateClusters clusters(opts.search.tol_sep, opts.search.allow_sign,
                                   opts.search.max_clusters);
        std::vector<std::size_t> index(L, 0);
        AmbiguityElement h;
        h.factors.resize(L);
        for (long long count = 0; count < total_size; ++count) {
            for (std::size_t l = 0; l < L; ++l) h.factors[l] = factor_elems[l][index[l]];
            Signal v = act(h, xhat);
            const Projection p = prior.project(v.flatten());
            ++result.points_scanned;
            if (p.distance <= capture_tol) clusters.add(std::move(v), p.distance);
            std::size_t l = 0;
            for (; l < L; ++l) {
                if (++index[l] < factor_elems[l].size()) break;
                index[l] = 0;
            }
            if (l == L) break;
        }
        result.raw_candidates = clusters.raw();
        result.best_residual = clusters.best_residual();
        result.status = status_from_clusters(clusters);
        result.candidates = clusters.take();
        return result;
    }

    // keep the best captured points, then polish one seed per descent basin
    struct Seed {
        double distance;
        AmbiguityElement element;
        Vector flat;
    };
    constexpr std::size_t kSeedCap = 4096;
    std::vector<Seed> seeds;  // max-heap by distance, bounded
    auto seed_less = [](const Seed& a, const Seed& b) { return a.distance < b.distance; };
    long long captured = 0;

    std::vector<std::size_t> index(L, 0);
    AmbiguityElement h;
    h.factors.resize(L);
    for (long long count = 0; count < total_size; ++count) {
        for (std::size_t l = 0; l < L; ++l) h.factors[l] = factor_elems[l][index[l]];
        Signal v = act(h, xhat);
        const Projection p = prior.project(v.flatten());
        ++result.points_scanned;
        if (p.distance <= capture_tol) {
            ++captured;
            if (seeds.size() < kSeedCap) {
                seeds.push_back(Seed{p.distance, h, v.flatten()});
                std::push_heap(seeds.begin(), seeds.end(), seed_less);
            } else if (p.distance < seeds.front().distance) {
                std::pop_heap(seeds.begin(), seeds.end(), seed_less);
                seeds.back() = Seed{p.distance, h, v.flatten()};
                std::push_heap(seeds.begin(), seeds.end(), seed_less);
            }
        }
        std::size_t l = 0;
        for (; l < L; ++l) {
            if (++index[l] < factor_elems[l].size()) break;
            index[l] = 0;
        }
        if (l == L) break;
    }
    result.raw_candidates = captured;

    std::sort(seeds.begin(), seeds.end(), seed_less);
    const double basin_radius = 4.0 * opts.delta * std::max(step_move, 1e-12);
    constexpr std::size_t kPolishCap = 512;
    std::vector<Vector> polished_from;
    CandidateClusters clusters(opts.search.tol_sep, opts.search.allow_sign,
                               opts.search.max_clusters);
    for (const auto& seed : seeds) {
        if (polished_from.size() >= kPolishCap) break;
        bool covered = false;
        for (const auto& q : polished_from)
            if ((q - seed.flat).norm() <= basin_radius) {
                covered = true;
                break;
            }
        if (covered) continue;
        polished_from.push_back(seed.flat);
        DescentResult d = descend(xhat, prior, seed.element, opts.search.polish_iters, 50);
        result.best_residual = std::min(result.best_residual, d.distance);
        if (d.distance <= opts.search.tol_in) clusters.add(std::move(d.signal), d.distance);
    }
    if (clusters.raw() > 0) result.best_residual = clusters.best_residual();
    result.status = status_from_clusters(clusters);
    result.candidates = clusters.take();
    return result;
}

/// Sphere grid over unit directions in R^m at roughly the given angular step.
/// Enumerates hyperspherical angles; the azimuthal angle runs the full circle.
class SphereGrid {
public:
    SphereGrid(int m, int steps) : m_(m), steps_(std::max(4, steps)) {
        if (m_ == 1) {
            total_ = 2;
        } else {
            total_ = steps_;
            for (int i = 0; i < m_ - 2; ++i) total_ *= steps_ / 2;
        }
    }

    long long size() const { return total_; }

    Vector direction(long long idx) const {
        Vector u(m_);
        if (m_ == 1) {
            u(0) = idx == 0 ? 1.0 : -1.0;
            return u;
        }
        const int polar_steps = steps_ / 2;
        // idx decomposes into m-2 polar indices and one azimuthal index
        long long rest = idx;
        const long long az = rest % steps_;
        rest /= steps_;
        double radial = 1.0;
        int coord = 0;
        for (int i = 0; i < m_ - 2; ++i) {
            const long long pi_idx = rest % polar_steps;
            rest /= polar_steps;
            const double theta = (pi_idx + 0.5) * std::numbers::pi / polar_steps;
            u(coord++) = radial * std::cos(theta);
            radial *= std::sin(theta);
        }
        const double phi = az * kTwoPi / steps_;
        u(coord++) = radial * std::cos(phi);
        u(coord) = radial * std::sin(phi);
        return u;
    }

    double angular_step() const {
        return m_ == 1 ? 0.0 : kTwoPi / steps_;
    }

private:
    int m_;
    int steps_;
    long long total_ = 0;
};

/// Gram mismatch of a prior point against the target blocks.
double gram_residual(const RepresentationSpec& spec, const Vector& v,
                     const std::vector<Matrix>& target) {
    double r2 = 0.0;
    int off = 0;
    for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
        const int nl = spec.blocks[l].irrep_dim;
        const int rl = spec.blocks[l].multiplicity;
        Eigen::Map<const Matrix> X(v.data() + off, nl, rl);
        r2 += (X.transpose() * X - target[l]).squaredNorm();
        off += nl * rl;
    }
    return std::sqrt(r2);
}

/// Group element mapping xhat blockwise onto the blocks of v (Procrustes).
AmbiguityElement element_toward(const Signal& xhat, const Vector& v) {
    AmbiguityElement h;
    int off = 0;
    for (std::size_t l = 0; l < xhat.spec.blocks.size(); ++l) {
        const int nl = xhat.spec.blocks[l].irrep_dim;
        const int rl = xhat.spec.blocks[l].multiplicity;
        Eigen::Map<const Matrix> target(v.data() + off, nl, rl);
        if (nl == 1) {
            const double s = xhat.blocks[l](0, 0) * target(0, 0) < 0 ? -1.0 : 1.0;
            h.factors.push_back(Matrix::Constant(1, 1, s));
        } else {
            h.factors.push_back(procrustes(xhat.blocks[l], Matrix(target)));
        }
        off += nl * rl;
    }
    return h;
}

/**
 * Exhaustive scan in prior coordinates for affine-subspace priors: points of
 * the subspace whose per-block Gram matches the orbit's are exactly the
 * orbit/prior intersections, and they lie on a known sphere in coefficient
 * space. Same capture guarantee as the product grid, at the same angular
 * resolution, but over an M-dimensional domain instead of the full product.
 */
RecoveryResult grid_scan_subspace(const Signal& xhat, const Prior& prior, const AffineSpan& span,
                                  const GridOptions& opts) {
    const auto& spec = xhat.spec;
    RecoveryResult result;
    result.method = RecoveryMethod::grid;
    const GramBlocks target = gram_blocks(xhat);

    const int M = static_cast<int>(span.basis.cols());
    const double xnorm = xhat.norm();
    // the intersection points satisfy |v| = |xhat|; on the subspace that is a
    // sphere around -U^T q of radius sqrt(|xhat|^2 - |perp offset|^2)
    const Vector a = span.basis.transpose() * span.offset;
    const double perp2 = (span.offset - span.basis * a).squaredNorm();
    const double rho2 = xnorm * xnorm - perp2;
    CandidateClusters clusters(opts.search.tol_sep, opts.search.allow_sign,
                               opts.search.max_clusters);
    const double slack = 1e-9 * (1.0 + xnorm * xnorm);
    if (rho2 < -slack - 2.0 * xnorm * opts.search.tol_in) {
        result.status = RecoveryStatus::not_found;
        result.note = "offset exceeds orbit radius";
        return result;
    }
    const double rho = std::sqrt(std::max(rho2, 0.0));

    int steps = static_cast<int>(std::llround(kTwoPi / opts.delta));
    if (M >= 2) {
        // shrink the per-angle resolution until the sphere grid fits the budget
        auto grid_size = [&](int s) {
            SphereGrid g(M, s);
            return g.size();
        };
        while (steps > 8 && grid_size(steps) > static_cast<long long>(opts.budget)) steps /= 2;
        if (grid_size(steps) > static_cast<long long>(opts.budget))
            throw GridBudgetError("orbit_search_grid: sphere grid exceeds budget");
    }
    SphereGrid grid(M, steps);

    // capture tolerance for the Gram residual at grid resolution
    const double eps1 = opts.search.tol_in * (2.0 * xnorm + opts.search.tol_in);
    const double dstep = rho * grid.angular_step() * std::sqrt(static_cast<double>(std::max(M - 1, 1)));
    const double tol_g = 3.0 * eps1 + 3.0 * (2.0 * xnorm + dstep) * dstep + slack;

    struct Seed {
        Vector z;
        double residual;
    };
    std::vector<Seed> seeds;
    double best_r = std::numeric_limits<double>::infinity();
    Vector best_z;
    const long long n = grid.size();
    for (long long i = 0; i < n; ++i) {
        const Vector z = rho * grid.direction(i) - a;
        const Vector v = span.basis * z + span.offset;
        const double r = gram_residual(spec, v, target.blocks);
        ++result.points_scanned;
        if (r < best_r) {
            best_r = r;
            best_z = z;
        }
        if (r <= tol_g) seeds.push_back(Seed{z, r});
    }
    // always polish the best point so noisy inputs report a best effort
    if (seeds.empty() && best_z.size() > 0) seeds.push_back(Seed{best_z, best_r});

    // one polish per coefficient-space cluster
    const double zsep = std::max(4.0 * rho * grid.angular_step(), 1e-8);
    std::vector<Vector> reps;
    long long polished = 0;
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& s, const Seed& t) { return s.residual < t.residual; });
    for (const auto& s : seeds) {
        bool close = false;
        for (const auto& r : reps)
            if ((r - s.z).norm() <= zsep) {
                close = true;
                break;
            }
        if (close) continue;
        reps.push_back(s.z);
        if (reps.size() > 4096) break;
        const Vector v = span.basis * s.z + span.offset;
        AmbiguityElement h0 = element_toward(xhat, v);
        DescentResult d = descend(xhat, prior, std::move(h0), opts.search.polish_iters, 50);
        ++polished;
        result.best_residual = std::min(result.best_residual, d.distance);
        if (d.distance <= opts.search.tol_in) clusters.add(std::move(d.signal), d.distance);
    }
    result.raw_candidates = clusters.raw();
    if (clusters.raw() > 0) result.best_residual = clusters.best_residual();
    result.status = status_from_clusters(clusters);
    result.candidates = clusters.take();
    result.note = "coefficient-sphere scan (M=" + std::to_string(M) + ")";
    return result;
}

} // namespace

RecoveryResult orbit_search_grid(const Signal& xhat, const Prior& prior, const GridOptions& opts) {
    xhat.validate();
    if (opts.delta <= 0 || opts.delta > kTwoPi)
        throw std::invalid_argument("orbit_search_grid: bad angle step");
    for (const auto& b : xhat.spec.blocks)
        if (b.irrep_dim > 2)
            throw std::invalid_argument("orbit_search_grid: blocks must have dimension <= 2");

    double total = 1.0;
    const double steps = std::ceil(kTwoPi / opts.delta);
    for (const auto& b : xhat.spec.blocks)
        total *= b.irrep_dim == 1 ? 2.0 : 2.0 * steps;

    if (total <= opts.budget)
        return grid_scan_product(xhat, prior, opts, static_cast<long long>(total));

    if (const auto span = prior.affine_span())
        return grid_scan_subspace(xhat, prior, *span, opts);

    throw GridBudgetError(
        "orbit_search_grid: product grid of " + std::to_string(total) +
        " elements exceeds the budget and the prior has no affine structure to reduce over");
}

RecoveryResult orbit_search_local(const Signal& xhat, const Prior& prior, const LocalOptions& opts,
                                  Rng& rng, const std::vector<AmbiguityElement>* initial) {
    xhat.validate();
    RecoveryResult result;
    result.method = RecoveryMethod::local;
    CandidateClusters clusters(opts.search.tol_sep, opts.search.allow_sign,
                               opts.search.max_clusters);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        AmbiguityElement h0 = (initial && r < static_cast<int>(initial->size()))
                                  ? (*initial)[r]
                                  : (r == 0 ? AmbiguityElement::identity(xhat.spec)
                                            : haar_ambiguity(xhat.spec, rng));
        DescentResult d = descend(xhat, prior, std::move(h0), opts.max_iters, opts.patience);
        ++result.points_scanned;
        best = std::min(best, d.distance);
        if (d.distance <= opts.search.tol_in) clusters.add(std::move(d.signal), d.distance);
    }
    result.raw_candidates = clusters.raw();
    result.best_residual = clusters.raw() > 0 ? clusters.best_residual() : best;
    result.status = status_from_clusters(clusters);
    result.candidates = clusters.take();
    if (result.status == RecoveryStatus::not_found)
        result.note = "no restart reached tol_in; best residual " + std::to_string(best);
    return result;
}

namespace {

RecoveryResult run_search(const GramBlocks& measurement, const Signal& xhat, const Prior& prior,
                          const RecoverConfig& config) {
    RecoveryResult result;
    switch (config.method) {
        case RecoveryMethod::enumerate: {
            const auto elements = sign_change_elements(xhat.spec);
            result = orbit_search_enumerate(elements, xhat, prior, config.enumerate_opts);
            break;
        }
        case RecoveryMethod::grid:
            result = orbit_search_grid(xhat, prior, config.grid);
            break;
        case RecoveryMethod::local: {
            Rng rng(config.seed);
            result = orbit_search_local(xhat, prior, config.local, rng);
            break;
        }
    }
    const double scale = std::max(1.0, measurement.frobenius_norm());
    for (auto& c : result.candidates)
        c.gram_error = gram_distance(gram_blocks(c.signal), measurement) / scale;
    return result;
}

} // namespace

RecoveryResult recover(const GramBlocks& measurement, const Prior& prior,
                       const RecoverConfig& config) {
    const GramBlocks clipped = clip_psd(measurement);
    const Signal xhat = canonical_factor(clipped);
    return run_search(measurement, xhat, prior, config);
}

RecoveryResult recover(const SecondMomentEstimate& measurement, const DataGroupSpec& group,
                       const Prior& prior, const RecoverConfig& config) {
    const GramBlocks gram = second_moment_to_gram(group, measurement);
    const Signal xhat = canonical_factor(gram);
    return run_search(gram, xhat, prior, config);
}

} // namespace orbitlab
