#ifndef DML_RNG_HPP
#define DML_RNG_HPP

#include <cstdint>

namespace dml {

/// SplitMix64 pseudo-random generator.
///
/// The state advances by a fixed increment and the output is a bijective mix
/// of the state, so the stream is effectively counter-based: the k-th draw is
/// a pure function of (seed, k). Substreams are derived by hashing
/// (master seed, stream index), which keeps parallel replications
/// reproducible independent of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent substream for replication / fold `index` under `master`.
    static Rng substream(std::uint64_t master, std::uint64_t index) {
        return Rng(mix(master ^ mix(index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double a, double b) { return a + (b - a) * next_double(); }

    /// Standard Gaussian via the inverse CDF (one uniform per draw, no cached
    /// state, so streams stay aligned across implementations).
    double next_gaussian();

    /// Unbiased uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= bound);
        return x % n;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace dml

#endif
