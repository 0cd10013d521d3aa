#pragma once

#include <cstdint>

namespace pbrc {

/// Seed-deterministic random stream.
///
/// The generator is SplitMix64, fixed bit-exactly so that any implementation
/// reproduces the same weights from the same seed:
///
///     state += 0x9E3779B97F4A7C15
///     z = state
///     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///     return z ^ (z >> 31)
///
/// The initial state is the seed itself. A uniform double in [0, 1) is the top
/// 53 bits of one draw scaled by 2^-53; uniform(lo, hi) is lo + (hi - lo) * u.
/// Standard normals use the Box-Muller cosine branch on two uniforms
/// (u1 mapped to (0, 1] as 1 - u), consuming exactly two draws each.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() noexcept;
    double next_unit() noexcept;
    double uniform(double lo, double hi) noexcept;
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    /// Number of 64-bit draws consumed so far.
    std::uint64_t position() const noexcept { return position_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    std::uint64_t position_ = 0;
};

/// Stateless SplitMix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t value) noexcept;

}  // namespace pbrc
