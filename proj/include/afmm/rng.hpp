#pragma once

// Deterministic random stream used everywhere randomness is needed.
//
// The generator is xoshiro256++ seeded through splitmix64. Both algorithms are
// fully specified at the bit level, so a given seed yields the same draw
// sequence on every platform and build. Standard-library distributions are
// deliberately avoided: their bit streams are implementation-defined.
//
// Draw protocol:
//   uniform01()      one 64-bit word, top 53 bits -> [0,1)
//   uniform(lo,hi)   one uniform01 draw
//   normal()         exactly two uniform01 draws (Box-Muller, cosine branch)
//   bernoulli(p)     one uniform01 draw
//   below(n)         one 64-bit word (Lemire reduction, no rejection loop)

#include <cstdint>
#include <cmath>

namespace afmm {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stable 64-bit combiner for deriving sub-seeds (population stream, sim
// stream, sweep cells). stable_mix(s, a) == stable_mix(s, a) forever.
inline std::uint64_t stable_mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL + (salt << 1));
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b >> 1) ^ salt;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace afmm
