#pragma once

#include <cmath>
#include <cstdint>

#include "cotrack/geometry.hpp"

namespace cotrack {

/// splitmix64 finalizer; stateless bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent stream labels. Separate purposes keep draws decoupled:
/// toggling clutter on or off must not perturb LoS noise, and vice versa.
enum class RngPurpose : std::uint64_t {
    trajectory = 1,
    detection = 2,
    los_noise = 3,
    clutter_count = 4,
    clutter_position = 5,
};

/// Deterministic counter-seeded random stream. Each (seed, purpose, entity,
/// step) tuple names an independent stream; draws within a stream advance a
/// splitmix64 state. All distributions are generated from explicit integer
/// arithmetic so output bytes are identical across platforms.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, RngPurpose purpose,
                 std::uint64_t entity = 0, std::uint64_t step = 0) {
        std::uint64_t h = mix64(seed);
        h = mix64(h ^ static_cast<std::uint64_t>(purpose));
        h = mix64(h ^ entity);
        h = mix64(h ^ step);
        state_ = h;
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); safe as a log argument.
    double uniform01_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (cosine branch, no caching).
    double gaussian() {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vec3 gaussian3() {
        const double x = gaussian();
        const double y = gaussian();
        const double z = gaussian();
        return {x, y, z};
    }

    /// Poisson count by inversion (Knuth); adequate for the rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01_open();
        } while (p > limit);
        return k - 1;
    }

private:
    std::uint64_t state_ = 0;
};

} // namespace cotrack
