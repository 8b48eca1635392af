#pragma once

#include <string>
#include <vector>

#include "orbitlab/rng.hpp"

namespace orbitlab {

/**
 * Tightness experiments for the recoverability thresholds, run in exact
 * arithmetic where the construction is rational.
 */

struct ParabolaSharpnessResult {
    bool seed_points_on_curve = false;  // (+-1/8, 1/16) satisfy the curve equation exactly
    int trials = 0;
    int persisted = 0;     // perturbed coefficient tuples still carrying a sign pair
    int identity_checks = 0;  // exact verifications that both pair points lie on the curve
    std::vector<std::string> sample_pairs;  // a few witnesses as exact rationals
};

/**
 * Sign-pair persistence for translated parabolas. The translate of y = x^2
 * has equation a x + b y - (c x + d y)^2 = 0 (plus scalars A, B in the affine
 * case). Solving for points (x, y), (-x, y) on the curve gives rational
 * expressions for y and x^2, so membership of the pair is an exact rational
 * identity. The seed tuple (1, 2, 2, 4) carries the pair (+-1/8, 1/16).
 */
ParabolaSharpnessResult parabola_sharpness(bool affine, int trials, Rng& rng);

struct Z4SharpnessResult {
    int trials = 0;
    int single_orbit = 0;  // rotated quadruples lying in one orbit of (x,y) -> (y,-x)
};

/// Rotates {(+-1,0),(0,+-1)} by Haar angles; the action is exact on doubles,
/// so orbit membership is checked with exact equality.
Z4SharpnessResult z4_sharpness(int trials, Rng& rng);

struct SO2SharpnessResult {
    int trials = 0;
    int common_orbit = 0;  // all four rotated points within grid tolerance of one circle orbit
    double tol = 0.0;
};

SO2SharpnessResult so2_sharpness(int trials, int grid_steps, Rng& rng);

} // namespace orbitlab
