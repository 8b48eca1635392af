#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbitlab/invariants.hpp"
#include "orbitlab/priors.hpp"

namespace orbitlab {

/// Gram block of rank exceeding its irreducible dimension: no signal in V
/// produces it. Distinct from a search returning nothing.
class InfeasibleGramError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested discretization does not fit the evaluation budget.
class GridBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RecoveryStatus { unique_up_to_sign, ambiguous, not_found };
enum class RecoveryMethod { enumerate, grid, local };

std::string to_string(RecoveryStatus s);
std::string to_string(RecoveryMethod m);

struct RecoveryCandidate {
    Signal signal;
    double residual = 0.0;    // distance to the prior
    double gram_error = 0.0;  // relative Frobenius mismatch against the measurement
};

struct RecoveryResult {
    std::vector<RecoveryCandidate> candidates;  // cluster representatives, best first
    RecoveryStatus status = RecoveryStatus::not_found;
    RecoveryMethod method = RecoveryMethod::enumerate;
    long long points_scanned = 0;
    long long raw_candidates = 0;
    double best_residual = std::numeric_limits<double>::infinity();
    std::string note;
};

/// min(|x-y|, |x+y|) <= tol * max(1, |x|); the sign branch is skipped when
/// allow_sign is false.
bool same_up_to_sign(const Signal& x, const Signal& y, double tol, bool allow_sign = true);

/**
 * Deterministic factor of PSD Gram blocks: X_l = [Lambda^(1/2) U^T; 0] from
 * the eigendecomposition with descending eigenvalues and a fixed eigenvector
 * sign convention. Throws InfeasibleGramError when rank(B_l) > N_l.
 */
Signal canonical_factor(const GramBlocks& gram);

struct SearchOptions {
    double tol_in = 1e-6;
    double tol_sep = 1e-3;
    bool allow_sign = true;
    bool polish = true;
    int polish_iters = 400;
    std::size_t max_clusters = 64;
};

struct GridOptions {
    SearchOptions search;
    double delta = 2.0 * 3.14159265358979323846 / 2000.0;  // per O(2) factor
    double budget = 1e8;
};

struct LocalOptions {
    SearchOptions search;
    int restarts = 64;
    int max_iters = 500;
    int patience = 200;
};

/// Exhaustive scan of an explicitly listed finite ambiguity group.
RecoveryResult orbit_search_enumerate(const std::vector<AmbiguityElement>& elements,
                                      const Signal& xhat, const Prior& prior,
                                      const SearchOptions& opts);

/**
 * Exhaustive discretized scan of prod O(N_l), N_l <= 2. When the product grid
 * fits the budget each O(2) factor is scanned as rotations plus reflections at
 * the given angle step. When it does not and the prior is an affine subspace,
 * the scan runs over the equivalent sphere of prior coefficients (the orbit
 * meets the subspace exactly where the per-block Gram constraints hold), which
 * is exhaustive over the same intersection set at the same resolution.
 */
RecoveryResult orbit_search_grid(const Signal& xhat, const Prior& prior, const GridOptions& opts);

/**
 * Riemannian descent over prod O(N_l): the Euclidean gradient is projected to
 * the tangent space (skew-symmetric part of Q^T G), the step retracted by
 * orthonormalization, step size by backtracking halving. Restarts are
 * Haar-random unless explicit starting elements are supplied.
 */
RecoveryResult orbit_search_local(const Signal& xhat, const Prior& prior, const LocalOptions& opts,
                                  Rng& rng,
                                  const std::vector<AmbiguityElement>* initial = nullptr);

/// All sign patterns of a spec whose blocks are one-dimensional.
std::vector<AmbiguityElement> sign_change_elements(const RepresentationSpec& spec,
                                                   std::uint64_t cap = 1u << 22);

struct RecoverConfig {
    RecoveryMethod method = RecoveryMethod::enumerate;
    GridOptions grid;
    LocalOptions local;
    SearchOptions enumerate_opts;
    std::uint64_t seed = 0;  // drives local-search restarts
};

/// Full pipeline from Gram blocks: clip, factor, search the ambiguity orbit.
RecoveryResult recover(const GramBlocks& measurement, const Prior& prior,
                       const RecoverConfig& config);

/// Full pipeline from a debiased second moment of the given data group.
RecoveryResult recover(const SecondMomentEstimate& measurement, const DataGroupSpec& group,
                       const Prior& prior, const RecoverConfig& config);

} // namespace orbitlab
