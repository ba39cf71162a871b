#pragma once

#include <cmath>
#include <cstdint>

namespace irt {

// SplitMix64: tiny, portable, fully specified by its seed. Every stochastic
// path in the library goes through this generator so that runs are
// reproducible independent of platform and thread count.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; never zero, safe under log().
    double next_open_double() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Box-Muller, no state carried between calls: two uniforms per draw.
    double next_normal(double mean, double sd) {
        const double u1 = next_open_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

// Decorrelated child seed for parallel sub-streams (one per respondent, etc.).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL));
    return mixer.next_u64();
}

} // namespace irt
