#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbitlab/repr.hpp"

namespace orbitlab {

struct Projection {
    Vector point;         // nearest point found in the set
    double distance = 0;  // ambient distance to that point
    bool exact = true;    // false when the projection is a heuristic / upper bound
    bool converged = true;
};

/// Exact linear structure: the set {basis z + offset} with orthonormal basis.
struct AffineSpan {
    Matrix basis;
    Vector offset;
};

/// One-dimensional parametric piece of a prior.
struct Curve {
    std::function<Vector(double)> at;
    bool periodic = false;
    double period = 0.0;
    /// Parameter interval guaranteed to contain any point of the curve with
    /// norm at most `radius` (ignored for periodic curves).
    std::function<std::pair<double, double>(double radius)> range_for_radius;
};

/**
 * A semi-algebraic prior set with a declared dimension, a sampler, and a
 * projection oracle. Structure hooks (affine span, finite point list,
 * union of subspaces, parametric curves) let translated priors keep their
 * projections exact where the geometry allows it.
 */
class Prior {
public:
    virtual ~Prior() = default;

    virtual int ambient_dim() const = 0;
    virtual int declared_dim() const = 0;
    virtual Vector sample(Rng& rng) const = 0;
    virtual Projection project(const Vector& v) const = 0;
    virtual std::string describe() const = 0;

    bool member(const Vector& v, double tol) const;

    virtual std::optional<AffineSpan> affine_span() const { return std::nullopt; }
    virtual std::optional<std::vector<Vector>> finite_points(std::size_t /*cap*/) const {
        return std::nullopt;
    }
    virtual std::optional<std::vector<AffineSpan>> subspace_union(std::size_t /*cap*/) const {
        return std::nullopt;
    }
    virtual std::vector<Curve> parametric_curves() const { return {}; }
    virtual std::unique_ptr<Prior> compose_affine(const Matrix& /*linear*/,
                                                  const Vector& /*shift*/) const {
        return nullptr;
    }
};

/// distance(prior, v) <= tol via the projection oracle. Requires tol > 0.
bool membership(const Prior& prior, const Vector& v, double tol);

/// Axis-aligned grid with `points_per_axis` values per axis spanning [-1, 1].
class GridPrior final : public Prior {
public:
    GridPrior(int points_per_axis, int dim);

    int ambient_dim() const override { return dim_; }
    int declared_dim() const override { return 0; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::optional<std::vector<Vector>> finite_points(std::size_t cap) const override;

    const std::vector<double>& axis_values() const { return values_; }

private:
    int points_per_axis_;
    int dim_;
    std::vector<double> values_;
};

/// Explicit finite point set.
class PointSetPrior final : public Prior {
public:
    explicit PointSetPrior(std::vector<Vector> points);

    int ambient_dim() const override;
    int declared_dim() const override { return 0; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::optional<std::vector<Vector>> finite_points(std::size_t cap) const override;

private:
    std::vector<Vector> points_;
};

/// Linear subspace spanned by orthonormalized columns of the given basis.
class SubspacePrior final : public Prior {
public:
    explicit SubspacePrior(const Matrix& basis);

    int ambient_dim() const override { return static_cast<int>(basis_.rows()); }
    int declared_dim() const override { return static_cast<int>(basis_.cols()); }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::optional<AffineSpan> affine_span() const override;

    const Matrix& basis() const { return basis_; }

private:
    Matrix basis_;  // orthonormal columns
};

/// Vectors with at most `sparsity` nonzero coefficients in the dictionary.
class SparseUnionPrior final : public Prior {
public:
    SparseUnionPrior(const Matrix& dictionary, int sparsity);

    int ambient_dim() const override { return static_cast<int>(dictionary_.rows()); }
    int declared_dim() const override { return sparsity_; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::optional<std::vector<AffineSpan>> subspace_union(std::size_t cap) const override;

    bool exhaustive() const { return exhaustive_; }

private:
    std::vector<int> support_at(std::size_t index) const;
    std::size_t support_count() const;

    Matrix dictionary_;
    int sparsity_;
    bool exhaustive_;
};

/// The curve y = x^2 in the plane.
class Parabola2DPrior final : public Prior {
public:
    int ambient_dim() const override { return 2; }
    int declared_dim() const override { return 1; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override { return "parabola2d"; }
    std::vector<Curve> parametric_curves() const override;
};

/// Union of a circle and a ray in the plane.
class RayCircleUnion2DPrior final : public Prior {
public:
    RayCircleUnion2DPrior(Vector circle_center, double radius, Vector ray_origin, Vector ray_dir);

    int ambient_dim() const override { return 2; }
    int declared_dim() const override { return 1; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override { return "ray_circle2d"; }
    std::vector<Curve> parametric_curves() const override;

    const Vector& circle_center() const { return center_; }
    double circle_radius() const { return radius_; }

private:
    Vector center_;
    double radius_;
    Vector ray_origin_;
    Vector ray_dir_;  // unit
};

/// Union of two lines through the origin in the plane.
class TwoLines2DPrior final : public Prior {
public:
    TwoLines2DPrior(double angle1, double angle2);

    int ambient_dim() const override { return 2; }
    int declared_dim() const override { return 1; }
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override { return "two_lines2d"; }
    std::optional<std::vector<AffineSpan>> subspace_union(std::size_t cap) const override;
    std::vector<Curve> parametric_curves() const override;

private:
    Vector dir1_;
    Vector dir2_;
};

struct AffineLayer {
    Matrix weight;
    Vector bias;
};

/// Image of latent space under alternating affine maps and ReLU, final
/// layer affine. Projection is multi-start gradient descent in the latent.
class ReluGeneratorPrior final : public Prior {
public:
    ReluGeneratorPrior(std::vector<AffineLayer> layers, int starts = 8, int max_iters = 500);

    int ambient_dim() const override;
    int declared_dim() const override;
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::unique_ptr<Prior> compose_affine(const Matrix& linear, const Vector& shift) const override;

    Vector forward(const Vector& z) const;
    const std::vector<AffineLayer>& layers() const { return layers_; }

private:
    std::vector<AffineLayer> layers_;
    int starts_;
    int max_iters_;
};

/// Eq-style forward pass of a ReLU generator.
Vector relu_forward(const ReluGeneratorPrior& gen, const Vector& z);

enum class TransformClass { GL, Aff, O };

std::string to_string(TransformClass c);

/// Invertible ambient automorphism used to produce generic translates.
struct GenericTransform {
    TransformClass cls = TransformClass::GL;
    Matrix linear;
    Vector shift;       // zero unless Aff
    Matrix inverse;     // of linear
    double condition = 1.0;
    int resamples = 0;  // GL draws rejected by the condition cap

    Vector apply(const Vector& v) const { return linear * v + shift; }
    Vector apply_inverse(const Vector& v) const { return inverse * (v - shift); }
};

/**
 * Draws a generic transform: GL with i.i.d. normal entries resampled until
 * the condition number is at most `cond_cap`, Aff adds a normal shift, O is
 * Haar-orthogonal.
 */
GenericTransform sample_transform(TransformClass cls, int ambient_dim, Rng& rng,
                                  double cond_cap = 1e6);

/// Image of a base prior under a generic transform.
class TranslatedPrior final : public Prior {
public:
    TranslatedPrior(std::shared_ptr<const Prior> base, GenericTransform transform);

    int ambient_dim() const override;
    int declared_dim() const override;
    Vector sample(Rng& rng) const override;
    Projection project(const Vector& v) const override;
    std::string describe() const override;
    std::optional<AffineSpan> affine_span() const override;
    std::optional<std::vector<Vector>> finite_points(std::size_t cap) const override;
    std::optional<std::vector<AffineSpan>> subspace_union(std::size_t cap) const override;

    const Prior& base() const { return *base_; }
    const GenericTransform& transform() const { return transform_; }

private:
    std::shared_ptr<const Prior> base_;
    GenericTransform transform_;
    std::unique_ptr<Prior> composed_;  // ReLU generators absorb the transform
};

/// Orthonormal basis of a random M-dimensional subspace of R^N.
Matrix random_subspace_basis(int ambient, int dim, Rng& rng);

} // namespace orbitlab
