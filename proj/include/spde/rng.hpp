#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace spde {
namespace rng {

// Philox4x32-10 counter-based generator.  A draw is a pure function of
// (seed, stream, index), which makes every trajectory reproducible regardless of how
// the work is scheduled across threads.

namespace detail {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox_block(std::uint64_t key, std::uint64_t ctr_hi,
                                                 std::uint64_t ctr_lo) {
    std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
    std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
    std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(philox_m0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(philox_m1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        k0 += philox_w0;
        k1 += philox_w1;
    }
    return {c0, c1, c2, c3};
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

// Box-Muller pair from one 128-bit block.  The uniforms use the top 53 bits shifted into
// (0, 1) so the logarithm is always finite.
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t pair_index) {
    const std::array<std::uint32_t, 4> b = philox_block(seed, stream, pair_index);
    const std::uint64_t u = join(b[0], b[1]);
    const std::uint64_t v = join(b[2], b[3]);
    const double u1 = static_cast<double>(u >> 11) * 0x1p-53 + 0x1p-54;
    const double u2 = static_cast<double>(v >> 11) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

} // namespace detail

/// Standard normal draw number `index` of the given (seed, stream).
inline double normal_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return detail::normal_pair(seed, stream, index >> 1)[index & 1];
}

/// Fill `out` with the draws at consecutive indices index0, index0 + 1, ...; equivalent to
/// calling normal_draw per entry but evaluates each Philox block once.
inline void normal_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t index0,
                        std::span<double> out) {
    std::size_t i = 0;
    while (i < out.size()) {
        const std::uint64_t index = index0 + i;
        const std::array<double, 2> z = detail::normal_pair(seed, stream, index >> 1);
        if ((index & 1) == 0 && i + 1 < out.size()) {
            out[i] = z[0];
            out[i + 1] = z[1];
            i += 2;
        } else {
            out[i] = z[index & 1];
            i += 1;
        }
    }
}

} // namespace rng
} // namespace spde
