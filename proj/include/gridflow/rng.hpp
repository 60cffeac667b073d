#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gridflow {

/// SplitMix64 step, used to whiten master-seed/stream-tag combinations so that
/// per-activity substreams are statistically independent of each other.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t stream_tag) {
    std::uint64_t state = master_seed;
    (void)splitmix64(state);
    state ^= 0x6a09e667f3bcc909ULL * (stream_tag + 1);
    return splitmix64(state);
}

/// Deterministic draw stream: std::mt19937_64 with hand-rolled transforms on top,
/// so results do not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Box-Muller; consumes exactly two uniforms per draw.
    double normal(double mean, double sd) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * radius * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Rejection-sampled truncated normal on [lo, hi].
    double truncated_normal(double mean, double sd, double lo, double hi) {
        for (;;) {
            const double x = normal(mean, sd);
            if (x >= lo && x <= hi) return x;
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace gridflow
