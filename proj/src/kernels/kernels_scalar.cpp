// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/kernels.hpp"

namespace spinrect::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_inplace_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
                 std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * a_rs + p * a_cs];
      const double* bp = b + p * b_rs;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * bp[j * b_cs];
    }
  }
}

}  // namespace spinrect::kernels::detail
