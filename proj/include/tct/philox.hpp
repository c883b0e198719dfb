#pragma once

// Counter-based random number generation (Philox4x32-10). Every draw is a
// pure function of (seed, stream, counter), so simulation output does not
// depend on evaluation order and per-unit substreams never collide.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace tct::rng {

/// Disjoint substream identifiers, one per consumer of randomness.
enum class Stream : std::uint32_t {
    sim_noise = 0,       // SVAR innovations, counter (time, trial, channel)
    boot_resample = 1,   // bootstrap trial indices, counter (replicate, attempt, draw)
    subsample = 2,       // event subsampling, counter (draw, 0, 0)
    mc_oracle = 3,       // Monte-Carlo KL oracle, counter (sample, component, 0)
};

namespace detail {

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace detail

/// One Philox4x32-10 block: 128-bit counter, 64-bit key -> 128 random bits.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    constexpr std::uint32_t kMulA = 0xD2511F53u;
    constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mul_hi_lo(kMulA, ctr[0], hi0, lo0);
        detail::mul_hi_lo(kMulB, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, Stream stream,
                                                 std::uint32_t c0, std::uint32_t c1,
                                                 std::uint32_t c2) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32({c0, c1, c2, static_cast<std::uint32_t>(stream)}, key);
}

/// Uniform double in (0, 1], built from 53 random bits.
inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, Stream stream, std::uint32_t c0,
                        std::uint32_t c1, std::uint32_t c2) {
    const auto w = philox_block(seed, stream, c0, c1, c2);
    return to_unit_double(w[0], w[1]);
}

/// Standard normal via Box-Muller on one Philox block.
inline double normal(std::uint64_t seed, Stream stream, std::uint32_t c0,
                     std::uint32_t c1, std::uint32_t c2) {
    const auto w = philox_block(seed, stream, c0, c1, c2);
    const double u1 = to_unit_double(w[0], w[1]);
    const double u2 = to_unit_double(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential draws within one substream; counter advances per draw.
/// Used where a loop needs many values from a single logical stream
/// (bootstrap index draws, subsampling).
class Substream {
public:
    Substream(std::uint64_t seed, Stream stream, std::uint32_t id0, std::uint32_t id1 = 0)
        : seed_(seed), stream_(stream), id0_(id0), id1_(id1) {}

    double next_uniform01() { return uniform01(seed_, stream_, id0_, id1_, counter_++); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t next_below(std::size_t n) {
        const double u = next_uniform01();
        auto k = static_cast<std::size_t>(u * static_cast<double>(n));
        return k >= n ? n - 1 : k;  // u == 1.0 edge
    }

    double next_normal() { return normal(seed_, stream_, id0_, id1_, counter_++); }

private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint32_t id0_;
    std::uint32_t id1_;
    std::uint32_t counter_ = 0;
};

}  // namespace tct::rng
