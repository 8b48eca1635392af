#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbitlab/rng.hpp"

namespace orbitlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One isotypic summand: an irreducible of dimension `irrep_dim` repeated
/// `multiplicity` times.
struct IsotypicBlock {
    int irrep_dim = 0;     // N_l
    int multiplicity = 0;  // R_l
};

/**
 * An orthogonal representation described by its isotypic decomposition.
 * The ambiguity group of the second moment is the product of O(N_l)
 * factors acting diagonally on the copies of each irreducible.
 */
struct RepresentationSpec {
    std::vector<IsotypicBlock> blocks;

    int dim() const {
        int d = 0;
        for (const auto& b : blocks) d += b.irrep_dim * b.multiplicity;
        return d;
    }

    void validate() const {
        if (blocks.empty()) throw std::invalid_argument("RepresentationSpec: no blocks");
        for (const auto& b : blocks) {
            if (b.irrep_dim < 1 || b.multiplicity < 1)
                throw std::invalid_argument("RepresentationSpec: block dimensions must be positive");
        }
    }

    bool operator==(const RepresentationSpec& o) const {
        if (blocks.size() != o.blocks.size()) return false;
        for (size_t i = 0; i < blocks.size(); ++i)
            if (blocks[i].irrep_dim != o.blocks[i].irrep_dim ||
                blocks[i].multiplicity != o.blocks[i].multiplicity)
                return false;
        return true;
    }
};

struct EffectiveDim {
    int dim_v = 0;      // dim V
    int orbit_dim = 0;  // k(H), the generic orbit dimension of the ambiguity group
    int effective = 0;  // K = dim V - k(H)
};

/// dim O(m) = m(m-1)/2, with m <= 0 mapped to 0.
inline long long orthogonal_group_dim(long long m) {
    return m <= 0 ? 0 : m * (m - 1) / 2;
}

/// dim U(m) = m^2, with m <= 0 mapped to 0.
inline long long unitary_group_dim(long long m) {
    return m <= 0 ? 0 : m * m;
}

EffectiveDim effective_dim(const RepresentationSpec& spec);

/// Bandlimited SO(3) coefficient model: blocks (2l+1, R) for l = 0..L.
RepresentationSpec cryoem_spec(int bandlimit, int radial_samples);

/// Real isotypic decomposition of R^N under circular shift and reflection.
RepresentationSpec dihedral_decomposition(int N);

/// Orbits of the product-of-orthogonal ambiguity group are connected iff
/// every irreducible dimension exceeds one.
bool orbits_connected(const RepresentationSpec& spec);

/**
 * A point of V stored blockwise: one N_l x R_l coefficient matrix per
 * isotypic block. Column r of block l holds the coefficients of the r-th
 * copy of the irreducible.
 */
struct Signal {
    RepresentationSpec spec;
    std::vector<Matrix> blocks;

    static Signal zero(const RepresentationSpec& spec);

    void validate() const;
    double norm() const;

    /// Block-major layout: blocks in spec order, copies (columns) contiguous.
    Vector flatten() const;
    static Signal unflatten(const RepresentationSpec& spec, const Vector& v);
};

/// Element of the ambiguity group H = prod O(N_l); one orthogonal factor per block.
struct AmbiguityElement {
    std::vector<Matrix> factors;

    static AmbiguityElement identity(const RepresentationSpec& spec);
    void validate(const RepresentationSpec& spec, double tol = 1e-12) const;
};

/// Diagonal action: block l maps X_l to Q_l X_l.
Signal act(const AmbiguityElement& h, const Signal& x);

/// Composition (h2 h1): factorwise product.
AmbiguityElement compose(const AmbiguityElement& h2, const AmbiguityElement& h1);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// triangular factor's diagonal signs absorbed into Q.
Matrix haar_orthogonal(int m, Rng& rng);

/// Haar on SO(m): haar_orthogonal with one column sign-flipped when det < 0.
Matrix haar_special_orthogonal(int m, Rng& rng);

AmbiguityElement haar_ambiguity(const RepresentationSpec& spec, Rng& rng);

/// Gaussian signal with the spec's block shapes.
Signal gaussian_signal(const RepresentationSpec& spec, Rng& rng);

/**
 * Orthonormal real Fourier basis of R^N ordered to match
 * dihedral_decomposition(N): constant column, then (cos, sin) pairs per
 * frequency, then the alternating column when N is even.
 */
Matrix fourier_isotypic_basis(int N);

} // namespace orbitlab
