#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace orbitlab {

/// splitmix64 finalizer; used to derive independent seeds from (base, stream).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/**
 * Seeded random stream. Wraps mt19937_64 but implements the uniform and
 * gaussian transforms itself so sequences are identical across standard
 * library implementations. One independent Rng per experiment trial,
 * derived from (base_seed, trial_index).
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed), seed_(seed) {}

    static Rng stream(std::uint64_t base, std::uint64_t index) {
        return Rng(derive_seed(base, index));
    }

    std::uint64_t seed() const { return seed_; }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling keeps the law exactly uniform
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = gen_(); } while (v >= limit);
        return v % n;
    }

    bool coin() { return (gen_() >> 63) != 0; }

    /// Standard normal via Marsaglia polar; second variate cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace orbitlab
