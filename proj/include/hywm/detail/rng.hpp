#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random numbers: every draw is a pure function of its
// (seed, counter) inputs, so evaluation order never changes a result.
namespace hywm::detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Uniform in (0, 1]; never returns 0 so it is safe under log().
constexpr double unit_open_low(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform in [0, 1).
constexpr double unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
  return unit(hash_combine(seed, counter));
}

/// Standard normal via Box-Muller on two hashed uniforms.
inline double gaussian(std::uint64_t seed, std::uint64_t counter) noexcept {
  const std::uint64_t h = hash_combine(seed, counter);
  const double u1 = unit_open_low(h);
  const double u2 = unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Index in [0, n) drawn from (seed, counter). n must be > 0.
inline std::size_t pick_index(std::uint64_t seed, std::uint64_t counter, std::size_t n) noexcept {
  return static_cast<std::size_t>(hash_combine(seed, counter) % n);
}

}  // namespace hywm::detail
