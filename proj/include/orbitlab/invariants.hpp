#pragma once

#include "orbitlab/groups.hpp"
#include "orbitlab/repr.hpp"

namespace orbitlab {

/// The second-moment sufficient statistic: one PSD R_l x R_l matrix per block.
struct GramBlocks {
    RepresentationSpec spec;
    std::vector<Matrix> blocks;

    double frobenius_norm() const;
};

/// B_l = X_l^T X_l, symmetrized. Invariant under the ambiguity action.
GramBlocks gram_blocks(const Signal& x);

/// Frobenius distance between two compatible Gram tuples.
double gram_distance(const GramBlocks& a, const GramBlocks& b);

struct SecondMomentEstimate {
    Matrix matrix;      // debiased: (1/n) sum y y^T - sigma^2 I
    long long n = 0;
    double sigma = 0.0;
};

/**
 * Monte-Carlo second moment of y = g.x + eps with g Haar over G and
 * eps ~ N(0, sigma^2 I), debiased by subtracting sigma^2 I.
 */
SecondMomentEstimate empirical_second_moment(const DataGroupSpec& G, const Vector& x,
                                             long long n, double sigma, Rng& rng);

/// Exact E[(g.x)(g.x)^T]: brute-force average for finite groups, closed form
/// for the rotation-blocks group.
Matrix exact_second_moment(const DataGroupSpec& G, const Vector& x);

/**
 * Reads Gram blocks off a second moment: conjugates into isotypic
 * coordinates and takes traces of the per-copy sub-blocks, then symmetrizes
 * and clips small negative eigenvalues. Requires a registered isotypic basis.
 */
GramBlocks second_moment_to_gram(const DataGroupSpec& G, const SecondMomentEstimate& est);

/// Squared DFT moduli, unnormalized transform (Parseval: sum = N ||x||^2).
Vector power_spectrum(const Vector& x);

/// Sorts each row ascending.
Matrix rowsort(const Matrix& X);

/// Eigenvalue clip: eigenvalues below rel_tol * ||B|| are set to zero.
Matrix clip_psd(const Matrix& B, double rel_tol = 1e-10);

GramBlocks clip_psd(const GramBlocks& B, double rel_tol = 1e-10);

} // namespace orbitlab
