// SPDX-License-Identifier: MIT
//
// mwrelay — counter-based random streams for reproducible parallel Monte Carlo.

#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace mwrelay::rng {

// SplitMix64: used only to expand a (seed, counter) key into generator state.
struct SplitMix64 {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ — small, fast, and seedable from a pure function of
// (seed, trial_index), which is what the determinism contract needs.
class Xoshiro256pp {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t key) {
        SplitMix64 sm{key};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Substream for one trial: a pure function of (seed, trial_index), so any
// worker that executes trial i produces exactly the same draws.
inline Xoshiro256pp trial_rng(std::uint64_t seed, std::uint64_t trial_index) {
    SplitMix64 pre{seed};
    const std::uint64_t base = pre.next();
    return Xoshiro256pp(base ^ (0xD1B54A32D192ED03ull * (trial_index + 1)));
}

// Circularly-symmetric complex normal CN(0,1): Re, Im ~ N(0, 1/2) independent.
template <class Rng>
std::complex<double> cnormal(Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double re = n01(rng) * kInvSqrt2;
    const double im = n01(rng) * kInvSqrt2;
    return {re, im};
}

// Unit-modulus QPSK symbol (±1 ± j)/√2; E|x|² = 1 holds per symbol.
template <class Rng>
std::complex<double> qpsk(Rng& rng) {
    const std::uint64_t bits = rng();
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double re = (bits & 1u) ? kInvSqrt2 : -kInvSqrt2;
    const double im = (bits & 2u) ? kInvSqrt2 : -kInvSqrt2;
    return {re, im};
}

}  // namespace mwrelay::rng
