// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "spinrect/tensor.hpp"

namespace spinrect {

struct GradCheckOptions {
  double tolerance = 1e-4;
  /// Central-difference step is step_scale * max(1, |x_i|).
  double step_scale = 1e-5;
  /// Denominator floor of the relative error, so coordinates whose true
  /// gradient is ~0 are compared absolutely.
  double denom_floor = 1e-4;
  /// Check at most this many coordinates (0 = all), chosen with `seed`.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  /// For piecewise-smooth functions (ReLU, max-pool, bilinear sampling):
  /// accept a coordinate only when the difference quotients at steps h and
  /// h/2 agree to a quarter of the tolerance, retrying once at h/10, and
  /// skip it otherwise. Skips are reported; a check skipping more
  /// coordinates than it compares fails.
  bool skip_kinks = false;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool passed = false;
};

/// Compares the tape gradient of a scalar function with central
/// differences at `x`. `f` must build its graph from `x` (a leaf; its
/// requires_grad flag is set for the check) and return a scalar tensor.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           const GradCheckOptions& options = {});

}  // namespace spinrect
