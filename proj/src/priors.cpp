#include "orbitlab/priors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace orbitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Matrix orthonormal_columns(const Matrix& A) {
    if (A.cols() == 0) return A;
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
    return Q;
}

Projection project_onto_span(const AffineSpan& span, const Vector& v) {
    const Vector w = v - span.offset;
    const Vector p = span.basis * (span.basis.transpose() * w) + span.offset;
    return Projection{p, (v - p).norm(), true, true};
}

/// Dense scan plus golden-section refinement of t -> |v - f(t)|.
Projection minimize_over_curve(const std::function<Vector(double)>& f, double lo, double hi,
                               const Vector& v, int scan_points = 1024) {
    double best_t = lo;
    double best_d = (v - f(lo)).norm();
    const double step = (hi - lo) / scan_points;
    for (int i = 1; i <= scan_points; ++i) {
        const double t = lo + i * step;
        const double d = (v - f(t)).norm();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double a = best_t - step, b = best_t + step;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = (v - f(c)).norm();
    double fd = (v - f(d)).norm();
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = (v - f(c)).norm();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = (v - f(d)).norm();
        }
    }
    const double t = 0.5 * (a + b);
    const Vector p = f(t);
    return Projection{p, (v - p).norm(), true, true};
}

} // namespace

bool Prior::member(const Vector& v, double tol) const {
    return project(v).distance <= tol;
}

bool membership(const Prior& prior, const Vector& v, double tol) {
    if (tol <= 0) throw std::invalid_argument("membership: tol must be positive");
    return prior.member(v, tol);
}

// ---------------------------------------------------------------------------
// GridPrior

GridPrior::GridPrior(int points_per_axis, int dim)
    : points_per_axis_(points_per_axis), dim_(dim) {
    if (points_per_axis < 1 || dim < 1)
        throw std::invalid_argument("GridPrior: parameters must be positive");
    if (points_per_axis == 1) {
        values_ = {0.0};
    } else {
        for (int i = 0; i < points_per_axis; ++i)
            values_.push_back(-1.0 + 2.0 * i / (points_per_axis - 1));
    }
}

Vector GridPrior::sample(Rng& rng) const {
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i)
        v(i) = values_[rng.uniform_index(values_.size())];
    return v;
}

Projection GridPrior::project(const Vector& v) const {
    Vector p(dim_);
    for (int i = 0; i < dim_; ++i) {
        double best = values_[0];
        for (double val : values_)
            if (std::abs(val - v(i)) < std::abs(best - v(i))) best = val;
        p(i) = best;
    }
    return Projection{p, (v - p).norm(), true, true};
}

std::string GridPrior::describe() const {
    return "grid(" + std::to_string(points_per_axis_) + "^" + std::to_string(dim_) + ")";
}

std::optional<std::vector<Vector>> GridPrior::finite_points(std::size_t cap) const {
    double count = std::pow(static_cast<double>(values_.size()), dim_);
    if (count > static_cast<double>(cap)) return std::nullopt;
    std::vector<Vector> pts;
    pts.reserve(static_cast<std::size_t>(count));
    std::vector<int> idx(dim_, 0);
    while (true) {
        Vector v(dim_);
        for (int i = 0; i < dim_; ++i) v(i) = values_[idx[i]];
        pts.push_back(v);
        int i = 0;
        for (; i < dim_; ++i) {
            if (++idx[i] < static_cast<int>(values_.size())) break;
            idx[i] = 0;
        }
        if (i == dim_) break;
    }
    return pts;
}

// ---------------------------------------------------------------------------
// PointSetPrior

PointSetPrior::PointSetPrior(std::vector<Vector> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("PointSetPrior: empty point set");
    for (const auto& p : points_)
        if (p.size() != points_[0].size())
            throw std::invalid_argument("PointSetPrior: inconsistent dimensions");
}

int PointSetPrior::ambient_dim() const { return static_cast<int>(points_[0].size()); }

Vector PointSetPrior::sample(Rng& rng) const {
    return points_[rng.uniform_index(points_.size())];
}

Projection PointSetPrior::project(const Vector& v) const {
    const Vector* best = &points_[0];
    double best_d = (v - points_[0]).norm();
    for (const auto& p : points_) {
        const double d = (v - p).norm();
        if (d < best_d) {
            best_d = d;
            best = &p;
        }
    }
    return Projection{*best, best_d, true, true};
}

std::string PointSetPrior::describe() const {
    return "point_set(" + std::to_string(points_.size()) + ")";
}

std::optional<std::vector<Vector>> PointSetPrior::finite_points(std::size_t cap) const {
    if (points_.size() > cap) return std::nullopt;
    return points_;
}

// ---------------------------------------------------------------------------
// SubspacePrior

SubspacePrior::SubspacePrior(const Matrix& basis) : basis_(orthonormal_columns(basis)) {
    if (basis.cols() < 0 || basis.cols() > basis.rows())
        throw std::invalid_argument("SubspacePrior: bad basis shape");
}

Vector SubspacePrior::sample(Rng& rng) const {
    Vector z(basis_.cols());
    for (int i = 0; i < z.size(); ++i) z(i) = rng.gaussian();
    return basis_ * z;
}

Projection SubspacePrior::project(const Vector& v) const {
    const Vector p = basis_ * (basis_.transpose() * v);
    return Projection{p, (v - p).norm(), true, true};
}

std::string SubspacePrior::describe() const {
    return "subspace(" + std::to_string(basis_.rows()) + "," + std::to_string(basis_.cols()) + ")";
}

std::optional<AffineSpan> SubspacePrior::affine_span() const {
    return AffineSpan{basis_, Vector::Zero(basis_.rows())};
}

// ---------------------------------------------------------------------------
// SparseUnionPrior

namespace {
std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}
} // namespace

SparseUnionPrior::SparseUnionPrior(const Matrix& dictionary, int sparsity)
    : dictionary_(dictionary), sparsity_(sparsity) {
    if (sparsity < 1 || sparsity > dictionary.cols())
        throw std::invalid_argument("SparseUnionPrior: bad sparsity");
    exhaustive_ = sparsity_ <= 3 && dictionary_.cols() <= 20;
}

std::size_t SparseUnionPrior::support_count() const {
    return binomial(static_cast<int>(dictionary_.cols()), sparsity_);
}

Vector SparseUnionPrior::sample(Rng& rng) const {
    // uniform support, normal coefficients
    const int D = static_cast<int>(dictionary_.cols());
    std::vector<int> all(D);
    for (int i = 0; i < D; ++i) all[i] = i;
    for (int i = 0; i < sparsity_; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(D - i));
        std::swap(all[i], all[j]);
    }
    Vector v = Vector::Zero(dictionary_.rows());
    for (int i = 0; i < sparsity_; ++i) v += rng.gaussian() * dictionary_.col(all[i]);
    return v;
}

Projection SparseUnionPrior::project(const Vector& v) const {
    const int D = static_cast<int>(dictionary_.cols());
    if (exhaustive_) {
        Projection best;
        best.distance = std::numeric_limits<double>::infinity();
        std::vector<int> support(sparsity_);
        // iterate over all supports in lexicographic order
        for (int i = 0; i < sparsity_; ++i) support[i] = i;
        while (true) {
            Matrix sub(dictionary_.rows(), sparsity_);
            for (int i = 0; i < sparsity_; ++i) sub.col(i) = dictionary_.col(support[i]);
            const Matrix q = orthonormal_columns(sub);
            const Vector p = q * (q.transpose() * v);
            const double d = (v - p).norm();
            if (d < best.distance) best = Projection{p, d, true, true};
            int i = sparsity_ - 1;
            while (i >= 0 && support[i] == D - sparsity_ + i) --i;
            if (i < 0) break;
            ++support[i];
            for (int j = i + 1; j < sparsity_; ++j) support[j] = support[j - 1] + 1;
        }
        return best;
    }
    // hard-thresholding heuristic on dictionary correlations
    std::vector<std::pair<double, int>> corr(D);
    for (int i = 0; i < D; ++i) corr[i] = {std::abs(dictionary_.col(i).dot(v)), i};
    std::partial_sort(corr.begin(), corr.begin() + sparsity_, corr.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    Matrix sub(dictionary_.rows(), sparsity_);
    for (int i = 0; i < sparsity_; ++i) sub.col(i) = dictionary_.col(corr[i].second);
    const Matrix q = orthonormal_columns(sub);
    const Vector p = q * (q.transpose() * v);
    return Projection{p, (v - p).norm(), false, true};
}

std::string SparseUnionPrior::describe() const {
    return "sparse_union(D=" + std::to_string(dictionary_.cols()) +
           ",M=" + std::to_string(sparsity_) + (exhaustive_ ? ",exact)" : ",approx)");
}

std::optional<std::vector<AffineSpan>> SparseUnionPrior::subspace_union(std::size_t cap) const {
    if (!exhaustive_ || support_count() > cap) return std::nullopt;
    std::vector<AffineSpan> spans;
    const int D = static_cast<int>(dictionary_.cols());
    std::vector<int> support(sparsity_);
    for (int i = 0; i < sparsity_; ++i) support[i] = i;
    while (true) {
        Matrix sub(dictionary_.rows(), sparsity_);
        for (int i = 0; i < sparsity_; ++i) sub.col(i) = dictionary_.col(support[i]);
        spans.push_back(AffineSpan{orthonormal_columns(sub), Vector::Zero(dictionary_.rows())});
        int i = sparsity_ - 1;
        while (i >= 0 && support[i] == D - sparsity_ + i) --i;
        if (i < 0) break;
        ++support[i];
        for (int j = i + 1; j < sparsity_; ++j) support[j] = support[j - 1] + 1;
    }
    return spans;
}

// ---------------------------------------------------------------------------
// Parabola2DPrior

Vector Parabola2DPrior::sample(Rng& rng) const {
    const double t = rng.uniform(-2.0, 2.0);
    Vector v(2);
    v << t, t * t;
    return v;
}

Projection Parabola2DPrior::project(const Vector& v) const {
    // nearest point minimizes (t-a)^2 + (t^2-b)^2; stationary points are the
    // real roots of 2t^3 + (1-2b)t - a
    const double a = v(0), b = v(1);
    const auto g = [&](double t) { return 2 * t * t * t + (1 - 2 * b) * t - a; };
    const double bound = 1.0 + std::max(std::abs(1 - 2 * b), std::abs(a)) / 2.0;

    std::vector<std::pair<double, double>> brackets;
    const double q = (2 * b - 1) / 6.0;  // g' = 6t^2 + (1-2b); critical points at +-sqrt(q)
    if (q > 0) {
        const double c = std::sqrt(q);
        brackets = {{-bound, -c}, {-c, c}, {c, bound}};
    } else {
        brackets = {{-bound, bound}};
    }
    std::vector<double> roots;
    for (auto [lo, hi] : brackets) {
        double glo = g(lo), ghi = g(hi);
        if (glo == 0.0) roots.push_back(lo);
        if (ghi == 0.0) roots.push_back(hi);
        if (glo * ghi >= 0.0) continue;
        for (int it = 0; it < 64; ++it) {  // bisection, then a Newton polish below
            const double mid = 0.5 * (lo + hi);
            const double gm = g(mid);
            if (gm == 0.0) break;
            if (glo * gm < 0) {
                hi = mid;
            } else {
                lo = mid;
                glo = gm;
            }
        }
        double t = 0.5 * (lo + hi);
        for (int it = 0; it < 4; ++it) {
            const double gp = 6 * t * t + (1 - 2 * b);
            if (gp == 0.0) break;
            t -= g(t) / gp;
        }
        roots.push_back(t);
    }
    if (roots.empty()) roots.push_back(0.0);
    double best_t = roots[0];
    auto dist2 = [&](double t) {
        const double dx = t - a, dy = t * t - b;
        return dx * dx + dy * dy;
    };
    for (double t : roots)
        if (dist2(t) < dist2(best_t)) best_t = t;
    Vector p(2);
    p << best_t, best_t * best_t;
    return Projection{p, std::sqrt(dist2(best_t)), true, true};
}

std::vector<Curve> Parabola2DPrior::parametric_curves() const {
    Curve c;
    c.at = [](double t) {
        Vector v(2);
        v << t, t * t;
        return v;
    };
    c.range_for_radius = [](double radius) {
        const double r = std::max(1.0, radius);
        return std::make_pair(-r, r);  // |t| <= max(1, radius) covers ||p|| <= radius
    };
    return {c};
}

// ---------------------------------------------------------------------------
// RayCircleUnion2DPrior

RayCircleUnion2DPrior::RayCircleUnion2DPrior(Vector circle_center, double radius,
                                             Vector ray_origin, Vector ray_dir)
    : center_(std::move(circle_center)),
      radius_(radius),
      ray_origin_(std::move(ray_origin)),
      ray_dir_(std::move(ray_dir)) {
    if (radius_ <= 0) throw std::invalid_argument("RayCircleUnion2DPrior: radius must be positive");
    if (ray_dir_.norm() == 0) throw std::invalid_argument("RayCircleUnion2DPrior: zero ray direction");
    ray_dir_.normalize();
}

Vector RayCircleUnion2DPrior::sample(Rng& rng) const {
    if (rng.coin()) {
        const double t = rng.uniform(0.0, kTwoPi);
        Vector v(2);
        v << center_(0) + radius_ * std::cos(t), center_(1) + radius_ * std::sin(t);
        return v;
    }
    return ray_origin_ + rng.uniform(0.0, 4.0) * ray_dir_;
}

Projection RayCircleUnion2DPrior::project(const Vector& v) const {
    // circle
    Projection circle;
    const Vector rel = v - center_;
    const double rn = rel.norm();
    if (rn == 0.0) {
        Vector p(2);
        p << center_(0) + radius_, center_(1);
        circle = Projection{p, radius_, true, true};
    } else {
        const Vector p = center_ + (radius_ / rn) * rel;
        circle = Projection{p, std::abs(rn - radius_), true, true};
    }
    // ray
    const double t = std::max(0.0, ray_dir_.dot(v - ray_origin_));
    const Vector q = ray_origin_ + t * ray_dir_;
    const Projection ray{q, (v - q).norm(), true, true};
    return circle.distance <= ray.distance ? circle : ray;
}

std::vector<Curve> RayCircleUnion2DPrior::parametric_curves() const {
    Curve circle;
    circle.periodic = true;
    circle.period = kTwoPi;
    circle.at = [c = center_, r = radius_](double t) {
        Vector v(2);
        v << c(0) + r * std::cos(t), c(1) + r * std::sin(t);
        return v;
    };
    circle.range_for_radius = [](double) { return std::make_pair(0.0, kTwoPi); };
    Curve ray;
    ray.at = [o = ray_origin_, d = ray_dir_](double t) { return Vector(o + t * d); };
    ray.range_for_radius = [o = ray_origin_](double radius) {
        return std::make_pair(0.0, radius + o.norm() + 1.0);
    };
    return {circle, ray};
}

// ---------------------------------------------------------------------------
// TwoLines2DPrior

TwoLines2DPrior::TwoLines2DPrior(double angle1, double angle2) {
    dir1_ = Vector(2);
    dir1_ << std::cos(angle1), std::sin(angle1);
    dir2_ = Vector(2);
    dir2_ << std::cos(angle2), std::sin(angle2);
}

Vector TwoLines2DPrior::sample(Rng& rng) const {
    const Vector& d = rng.coin() ? dir1_ : dir2_;
    return rng.uniform(-2.0, 2.0) * d;
}

Projection TwoLines2DPrior::project(const Vector& v) const {
    const Vector p1 = dir1_.dot(v) * dir1_;
    const Vector p2 = dir2_.dot(v) * dir2_;
    const double d1 = (v - p1).norm(), d2 = (v - p2).norm();
    return d1 <= d2 ? Projection{p1, d1, true, true} : Projection{p2, d2, true, true};
}

std::optional<std::vector<AffineSpan>> TwoLines2DPrior::subspace_union(std::size_t) const {
    std::vector<AffineSpan> spans;
    spans.push_back(AffineSpan{dir1_, Vector::Zero(2)});
    spans.push_back(AffineSpan{dir2_, Vector::Zero(2)});
    return spans;
}

std::vector<Curve> TwoLines2DPrior::parametric_curves() const {
    std::vector<Curve> out;
    for (const Vector& d : {dir1_, dir2_}) {
        Curve c;
        c.at = [d](double t) { return Vector(t * d); };
        c.range_for_radius = [](double radius) {
            return std::make_pair(-radius - 1.0, radius + 1.0);
        };
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ReluGeneratorPrior

ReluGeneratorPrior::ReluGeneratorPrior(std::vector<AffineLayer> layers, int starts, int max_iters)
    : layers_(std::move(layers)), starts_(starts), max_iters_(max_iters) {
    if (layers_.empty()) throw std::invalid_argument("ReluGeneratorPrior: no layers");
    for (size_t i = 0; i + 1 < layers_.size(); ++i)
        if (layers_[i + 1].weight.cols() != layers_[i].weight.rows())
            throw std::invalid_argument("ReluGeneratorPrior: layer shapes do not compose");
    for (const auto& l : layers_)
        if (l.bias.size() != l.weight.rows())
            throw std::invalid_argument("ReluGeneratorPrior: bias shape mismatch");
}

int ReluGeneratorPrior::ambient_dim() const {
    return static_cast<int>(layers_.back().weight.rows());
}

int ReluGeneratorPrior::declared_dim() const {
    return std::min(static_cast<int>(layers_.front().weight.cols()), ambient_dim());
}

Vector ReluGeneratorPrior::forward(const Vector& z) const {
    if (z.size() != layers_.front().weight.cols())
        throw std::invalid_argument("ReluGeneratorPrior: latent dimension mismatch");
    Vector h = z;
    for (size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i].weight * h + layers_[i].bias;
        if (i + 1 < layers_.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

Vector relu_forward(const ReluGeneratorPrior& gen, const Vector& z) { return gen.forward(z); }

Vector ReluGeneratorPrior::sample(Rng& rng) const {
    Vector z(layers_.front().weight.cols());
    for (int i = 0; i < z.size(); ++i) z(i) = rng.gaussian();
    return forward(z);
}

Projection ReluGeneratorPrior::project(const Vector& v) const {
    // multi-start latent gradient descent; deterministic via a fixed seed
    Rng rng(0x7e11u);
    const int latent = static_cast<int>(layers_.front().weight.cols());
    Vector best_z = Vector::Zero(latent);
    Vector best_p = forward(best_z);
    double best_d2 = (v - best_p).squaredNorm();
    bool converged = false;

    for (int s = 0; s < starts_; ++s) {
        Vector z(latent);
        for (int i = 0; i < latent; ++i) z(i) = (s == 0) ? 0.0 : rng.gaussian();
        double step = 0.1;
        Vector p = forward(z);
        double d2 = (v - p).squaredNorm();
        for (int it = 0; it < max_iters_; ++it) {
            // backprop the residual through the layers
            std::vector<Vector> pre;  // pre-activation per layer
            Vector h = z;
            for (size_t i = 0; i < layers_.size(); ++i) {
                h = layers_[i].weight * h + layers_[i].bias;
                pre.push_back(h);
                if (i + 1 < layers_.size()) h = h.cwiseMax(0.0);
            }
            Vector grad = 2.0 * (h - v);
            for (size_t i = layers_.size(); i-- > 0;) {
                if (i + 1 < layers_.size())
                    grad = grad.cwiseProduct((pre[i].array() > 0.0).cast<double>().matrix());
                grad = layers_[i].weight.transpose() * grad;
            }
            if (grad.norm() < 1e-12) break;
            Vector z_new = z - step * grad;
            Vector p_new = forward(z_new);
            double d2_new = (v - p_new).squaredNorm();
            int halvings = 0;
            while (d2_new > d2 && halvings < 30) {
                step *= 0.5;
                z_new = z - step * grad;
                p_new = forward(z_new);
                d2_new = (v - p_new).squaredNorm();
                ++halvings;
            }
            if (d2_new >= d2 - 1e-16 * (1.0 + d2)) break;
            z = z_new;
            d2 = d2_new;
            step *= 1.5;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best_z = z;
            best_p = forward(z);
            converged = true;
        }
    }
    return Projection{best_p, std::sqrt(best_d2), false, converged};
}

std::string ReluGeneratorPrior::describe() const {
    return "relu_generator(depth=" + std::to_string(layers_.size()) + ")";
}

std::unique_ptr<Prior> ReluGeneratorPrior::compose_affine(const Matrix& linear,
                                                          const Vector& shift) const {
    std::vector<AffineLayer> layers = layers_;
    AffineLayer& last = layers.back();
    last.bias = linear * last.bias + shift;
    last.weight = linear * last.weight;
    return std::make_unique<ReluGeneratorPrior>(std::move(layers), starts_, max_iters_);
}

// ---------------------------------------------------------------------------
// GenericTransform

std::string to_string(TransformClass c) {
    switch (c) {
        case TransformClass::GL: return "gl";
        case TransformClass::Aff: return "aff";
        case TransformClass::O: return "o";
    }
    return "?";
}

GenericTransform sample_transform(TransformClass cls, int ambient_dim, Rng& rng,
                                  double cond_cap) {
    if (ambient_dim < 1) throw std::invalid_argument("sample_transform: ambient_dim must be >= 1");
    GenericTransform t;
    t.cls = cls;
    t.shift = Vector::Zero(ambient_dim);
    if (cls == TransformClass::O) {
        t.linear = haar_orthogonal(ambient_dim, rng);
        t.inverse = t.linear.transpose();
        t.condition = 1.0;
        return t;
    }
    for (int attempt = 0;; ++attempt) {
        Matrix A(ambient_dim, ambient_dim);
        for (int i = 0; i < ambient_dim; ++i)
            for (int j = 0; j < ambient_dim; ++j) A(i, j) = rng.gaussian();
        Eigen::JacobiSVD<Matrix> svd(A);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (smin > 0 && smax / smin <= cond_cap) {
            t.linear = A;
            t.condition = smax / smin;
            t.resamples = attempt;
            break;
        }
        if (attempt > 256)
            throw std::runtime_error("sample_transform: condition cap unreachable");
    }
    t.inverse = t.linear.inverse();
    if (cls == TransformClass::Aff)
        for (int i = 0; i < ambient_dim; ++i) t.shift(i) = rng.gaussian();
    return t;
}

// ---------------------------------------------------------------------------
// TranslatedPrior

TranslatedPrior::TranslatedPrior(std::shared_ptr<const Prior> base, GenericTransform transform)
    : base_(std::move(base)), transform_(std::move(transform)) {
    if (transform_.linear.rows() != base_->ambient_dim())
        throw std::invalid_argument("TranslatedPrior: transform dimension mismatch");
    composed_ = base_->compose_affine(transform_.linear, transform_.shift);
}

int TranslatedPrior::ambient_dim() const { return base_->ambient_dim(); }
int TranslatedPrior::declared_dim() const { return base_->declared_dim(); }

Vector TranslatedPrior::sample(Rng& rng) const { return transform_.apply(base_->sample(rng)); }

std::string TranslatedPrior::describe() const {
    return to_string(transform_.cls) + "-translate(" + base_->describe() + ")";
}

std::optional<AffineSpan> TranslatedPrior::affine_span() const {
    const auto span = base_->affine_span();
    if (!span) return std::nullopt;
    return AffineSpan{orthonormal_columns(transform_.linear * span->basis),
                      transform_.linear * span->offset + transform_.shift};
}

std::optional<std::vector<Vector>> TranslatedPrior::finite_points(std::size_t cap) const {
    auto pts = base_->finite_points(cap);
    if (!pts) return std::nullopt;
    for (auto& p : *pts) p = transform_.apply(p);
    return pts;
}

std::optional<std::vector<AffineSpan>> TranslatedPrior::subspace_union(std::size_t cap) const {
    auto spans = base_->subspace_union(cap);
    if (!spans) return std::nullopt;
    for (auto& s : *spans)
        s = AffineSpan{orthonormal_columns(transform_.linear * s.basis),
                       transform_.linear * s.offset + transform_.shift};
    return spans;
}

Projection TranslatedPrior::project(const Vector& v) const {
    // orthogonal translate: solve in base coordinates, distances are preserved
    if (transform_.cls == TransformClass::O) {
        const Vector w = transform_.apply_inverse(v);
        Projection p = base_->project(w);
        p.point = transform_.apply(p.point);
        return p;
    }
    if (const auto span = affine_span())
        return project_onto_span(*span, v);
    if (const auto spans = subspace_union(1u << 14)) {
        Projection best;
        best.distance = std::numeric_limits<double>::infinity();
        for (const auto& s : *spans) {
            const Projection p = project_onto_span(s, v);
            if (p.distance < best.distance) best = p;
        }
        return best;
    }
    if (const auto pts = finite_points(1u << 21)) {
        const Vector* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& p : *pts) {
            const double d = (v - p).norm();
            if (d < best_d) {
                best_d = d;
                best = &p;
            }
        }
        return Projection{*best, best_d, true, true};
    }
    if (composed_) return composed_->project(v);
    const auto curves = base_->parametric_curves();
    if (!curves.empty()) {
        // minimize over each 1-D piece in the ambient metric
        Projection best;
        best.distance = std::numeric_limits<double>::infinity();
        const double op_inv = transform_.inverse.norm();  // Frobenius bounds the operator norm
        for (const auto& c : curves) {
            double lo, hi;
            if (c.periodic) {
                lo = 0.0;
                hi = c.period;
            } else {
                const Vector probe = transform_.apply(c.at(0.0));
                const double d0 = (v - probe).norm();
                const double radius =
                    op_inv * ((v.norm() + d0 + transform_.shift.norm()) + 1.0);
                std::tie(lo, hi) = c.range_for_radius(radius);
            }
            const auto f = [&](double t) { return Vector(transform_.apply(c.at(t))); };
            const Projection p = minimize_over_curve(f, lo, hi, v, 4096);
            if (p.distance < best.distance) best = p;
        }
        return best;
    }
    // fall back to base coordinates; the mapped point is a member, so the
    // ambient residual upper-bounds the true distance
    const Vector w = transform_.apply_inverse(v);
    Projection p = base_->project(w);
    p.point = transform_.apply(p.point);
    p.distance = (v - p.point).norm();
    p.exact = false;
    return p;
}

Matrix random_subspace_basis(int ambient, int dim, Rng& rng) {
    if (dim < 0 || dim > ambient) throw std::invalid_argument("random_subspace_basis: bad dim");
    const Matrix Q = haar_orthogonal(ambient, rng);
    return Q.leftCols(dim);
}

} // namespace orbitlab
