// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded randomness with portable output: the engine is std::mt19937_64
// (fully specified by the standard) and the distributions are written out
// here instead of relying on implementation-defined std:: distributions.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace spinrect {

/// SplitMix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t value);

/// Seed for item `index` of a stream seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal (Box-Muller, no cached second value).
  double normal();
  bool coin() { return (next_u64() >> 63) != 0; }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace spinrect
