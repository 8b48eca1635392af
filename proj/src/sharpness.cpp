#include "orbitlab/sharpness.hpp"

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace orbitlab {

namespace {

/// a x + b y + A - (c x + d y + B)^2 evaluated exactly.
mpq_class curve_value(const mpq_class& a, const mpq_class& b, const mpq_class& A,
                      const mpq_class& c, const mpq_class& d, const mpq_class& B,
                      const mpq_class& x, const mpq_class& y) {
    const mpq_class lin = a * x + b * y + A;
    const mpq_class arg = c * x + d * y + B;
    return lin - arg * arg;
}

mpq_class perturb(const mpq_class& base, Rng& rng) {
    // rational offset k/256 with k in [-16, 16]
    const long k = static_cast<long>(rng.uniform_index(33)) - 16;
    return base + mpq_class(k, 256);
}

} // namespace

ParabolaSharpnessResult parabola_sharpness(bool affine, int trials, Rng& rng) {
    ParabolaSharpnessResult out;
    out.trials = trials;

    const mpq_class a0(1), b0(2), c0(2), d0(4), A0(0), B0(0);
    const mpq_class x0(1, 8), y0(1, 16);
    out.seed_points_on_curve = curve_value(a0, b0, A0, c0, d0, B0, x0, y0) == 0 &&
                               curve_value(a0, b0, A0, c0, d0, B0, -x0, y0) == 0;

    for (int t = 0; t < trials; ++t) {
        const mpq_class a = perturb(a0, rng);
        const mpq_class b = perturb(b0, rng);
        const mpq_class c = perturb(c0, rng);
        const mpq_class d = perturb(d0, rng);
        const mpq_class A = affine ? perturb(A0, rng) : A0;
        const mpq_class B = affine ? perturb(B0, rng) : B0;
        if (a == 0 || c == 0 || d == 0) continue;

        // points (x, y), (-x, y) both lie on the curve iff the odd part
        // vanishes (fixes y) and the even part vanishes (fixes x^2)
        const mpq_class y = (a / (2 * c) - B) / d;
        const mpq_class dyB = d * y + B;
        const mpq_class x2 = (b * y + A - dyB * dyB) / (c * c);
        if (!(x2 > 0) || y == 0) continue;

        // exact identity check: f(+-x, y) = (b y + A - (d y + B)^2) - c^2 x^2
        // once the odd part is zero; both evaluations reduce to rationals
        const mpq_class even_part = b * y + A - dyB * dyB - c * c * x2;
        const mpq_class odd_part = a - 2 * c * dyB;
        if (even_part != 0 || odd_part != 0)
            throw std::logic_error("parabola_sharpness: rational identity failed");
        out.identity_checks += 2;
        ++out.persisted;
        if (out.sample_pairs.size() < 3)
            out.sample_pairs.push_back("x^2 = " + x2.get_str() + ", y = " + y.get_str());
    }
    return out;
}

Z4SharpnessResult z4_sharpness(int trials, Rng& rng) {
    Z4SharpnessResult out;
    out.trials = trials;
    using Point = std::array<double, 2>;
    for (int t = 0; t < trials; ++t) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double c = std::cos(theta), s = std::sin(theta);
        // rotated copies of (1,0), (-1,0), (0,1), (0,-1)
        const std::array<Point, 4> rotated = {
            Point{c, s}, Point{-c, -s}, Point{-s, c}, Point{s, -c}};
        // orbit of the first point under (x, y) -> (y, -x); exact on doubles
        std::array<Point, 4> orbit;
        orbit[0] = rotated[0];
        for (int i = 1; i < 4; ++i) orbit[i] = Point{orbit[i - 1][1], -orbit[i - 1][0]};
        bool all_found = true;
        for (const auto& p : rotated) {
            bool found = false;
            for (const auto& q : orbit)
                if (p[0] == q[0] && p[1] == q[1]) {
                    found = true;
                    break;
                }
            if (!found) {
                all_found = false;
                break;
            }
        }
        if (all_found) ++out.single_orbit;
    }
    return out;
}

SO2SharpnessResult so2_sharpness(int trials, int grid_steps, Rng& rng) {
    if (grid_steps < 4) throw std::invalid_argument("so2_sharpness: grid too coarse");
    SO2SharpnessResult out;
    out.trials = trials;
    const double delta = 2.0 * std::numbers::pi / grid_steps;
    out.tol = 10.0 * delta;
    using Point = std::array<double, 2>;
    for (int t = 0; t < trials; ++t) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double c = std::cos(theta), s = std::sin(theta);
        const std::array<Point, 4> rotated = {
            Point{c, s}, Point{-c, -s}, Point{-s, c}, Point{s, -c}};
        // equal radii put the quadruple on one circle; the grid confirms each
        // point is reached from the first by some rotation
        bool ok = true;
        for (const auto& p : rotated) {
            const double r = std::hypot(p[0], p[1]);
            if (std::abs(r - 1.0) > 1e-12) ok = false;
        }
        for (int i = 1; i < 4 && ok; ++i) {
            double best = 1e300;
            for (int k = 0; k < grid_steps; ++k) {
                const double ck = std::cos(k * delta), sk = std::sin(k * delta);
                const double qx = ck * rotated[0][0] - sk * rotated[0][1];
                const double qy = sk * rotated[0][0] + ck * rotated[0][1];
                best = std::min(best, std::hypot(qx - rotated[i][0], qy - rotated[i][1]));
            }
            if (best > out.tol) ok = false;
        }
        if (ok) ++out.common_orbit;
    }
    return out;
}

} // namespace orbitlab
