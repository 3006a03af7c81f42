#pragma once

#include <cstdint>
#include <cstddef>

namespace iovsim {

/// Deterministic 64-bit PRNG (xoshiro256++ seeded via splitmix64).
///
/// Every random draw in the toolkit flows from one master seed through
/// explicitly forked streams, so runs are bit-reproducible across
/// platforms and compilers. std:: distributions are avoided on purpose:
/// their outputs are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed = 0x9E3779B97F4A7C15ULL) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    /// Independent substream for a given role (golden-ratio mixing).
    Rng fork(uint64_t stream_index) const {
        return Rng(state_[0] ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1)));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + uniform01() * (b - a); }

    /// Uniform integer in [lo, hi], both ends inclusive. Lemire reduction, no modulo bias.
    uint64_t uniform_int(uint64_t lo, uint64_t hi) {
        const uint64_t span = hi - lo + 1;
        if (span == 0) return next_u64();  // full 64-bit range
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * span;
        auto low = static_cast<uint64_t>(m);
        if (low < span) {
            const uint64_t threshold = (0 - span) % span;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * span;
                low = static_cast<uint64_t>(m);
            }
        }
        return lo + static_cast<uint64_t>(m >> 64);
    }

    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_int(uint64_t{0}, static_cast<uint64_t>(hi - lo)));
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace iovsim
