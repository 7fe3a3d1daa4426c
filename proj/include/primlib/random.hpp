#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace primlib {

/// Deterministic random helpers built directly on std::mt19937_64 output.
///
/// The std::mt19937_64 engine itself is pinned by the C++ standard, but the
/// standard *distributions* are not — their output may differ across standard
/// libraries. Everything here maps raw engine words to values with fixed
/// arithmetic so that a given seed yields identical results on every
/// platform.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_double(rng);
}

/// Uniform integer in [0, n) by rejection sampling (exact, unbiased).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  // Largest multiple of n that fits in 2^64 marks the acceptance zone.
  const std::uint64_t zone = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  for (;;) {
    const std::uint64_t word = rng();
    if (word <= zone) return word % n;
  }
}

/// First `count` entries of a Fisher-Yates shuffle of {0, ..., n-1}:
/// `count` distinct indices, order-dependent on the engine state.
inline std::vector<std::size_t> sample_indices(std::mt19937_64& rng, std::size_t count,
                                               std::size_t n) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (count > n) count = n;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace primlib
