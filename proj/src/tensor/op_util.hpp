// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <string>

#include "spinrect/tensor.hpp"

namespace spinrect::detail {

/// Gradient buffer of an input if it takes part in differentiation.
inline double* grad_of(const Tensor& t) {
  if (!t.requires_grad()) return nullptr;
  auto& n = t.node();
  n.ensure_grad();
  return n.grad.data();
}

inline const double* out_grad(const Tensor& t) { return t.node().grad.data(); }

[[noreturn]] inline void shape_fail(std::string_view op, const std::string& what) {
  throw ShapeError(std::string(op) + ": " + what);
}

inline void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_fail(op, "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

inline void require_rank(std::string_view op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    shape_fail(op, "expected rank " + std::to_string(rank) + ", got shape " +
                       shape_str(t.shape()));
  }
}

}  // namespace spinrect::detail
