#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace lcamv {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi).
inline double wrap_pi(double a) {
  double w = std::remainder(a, kTwoPi);  // (-pi, pi]
  if (w >= kPi) w -= kTwoPi;
  return w;
}

/// Pairwise (cascade) summation; deterministic and accurate for long reductions.
inline double pairwise_sum(std::span<const double> v) {
  size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// --- counter-based RNG -----------------------------------------------------
//
// Stateless hash generator keyed by (seed, stream, counter). Parallel renders
// draw per-pixel noise from it, so thread count never changes the output.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t counter_hash(uint64_t seed, uint64_t stream, uint64_t counter) {
  uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ counter);
  return h;
}

/// Uniform in (0, 1); never returns exactly 0 so it is safe inside log().
inline double u64_to_unit_open(uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

/// One standard-normal draw keyed by (seed, stream, counter).
inline double counter_normal(uint64_t seed, uint64_t stream, uint64_t counter) {
  double u1 = u64_to_unit_open(counter_hash(seed, stream, counter * 2));
  double u2 = u64_to_unit_open(counter_hash(seed, stream, counter * 2 + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// --- gray code ---------------------------------------------------------------

inline uint32_t binary_to_gray(uint32_t b) { return b ^ (b >> 1); }

inline uint32_t gray_to_binary(uint32_t g) {
  uint32_t b = g;
  for (uint32_t shift = 1; shift < 32; shift <<= 1) b ^= b >> shift;
  return b;
}

inline bool is_power_of_two(uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(uint32_t v) {
  int n = 0;
  while ((1u << n) < v) ++n;
  return n;
}

}  // namespace lcamv
