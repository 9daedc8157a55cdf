#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spme {

// Counter-based Gaussian source: every draw is a pure function of
// (seed, step, mode), so a noise path does not depend on which worker
// produces it or in what order.
namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t step, std::uint64_t mode,
                                 std::uint64_t lane) noexcept {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ step);
    h = splitmix64(h ^ (mode * 0xD1B54A32D192ED03ull));
    return splitmix64(h ^ (lane + 0x2545F4914F6CDD1Dull));
}

// Uniform on the open interval (0, 1) from the top 53 bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller on two independent hashed uniforms.
inline double standard_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t mode) noexcept {
    const double u1 = to_unit_open(hash_key(seed, step, mode, 0));
    const double u2 = to_unit_open(hash_key(seed, step, mode, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t mode) noexcept {
    return to_unit_open(hash_key(seed, step, mode, 2));
}

// Seed of the i-th independent sample derived from a base seed.
constexpr std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index) noexcept { return base + index; }

}  // namespace rng
}  // namespace spme
