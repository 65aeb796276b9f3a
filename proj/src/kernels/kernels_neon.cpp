// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>
#define SPINRECT_HAVE_NEON 1
#else
#define SPINRECT_HAVE_NEON 0
#endif

namespace spinrect::kernels::detail {

#if SPINRECT_HAVE_NEON

bool neon_compiled() { return true; }

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc = __builtin_fma(a[i], b[i], acc);
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = __builtin_fma(alpha, x[i], y[i]);
}

void add_inplace_neon(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * a_rs + p * a_cs];
      const double* bp = b + p * b_rs;
      for (std::size_t j = 0; j < n; ++j) crow[j] = __builtin_fma(aip, bp[j * b_cs], crow[j]);
    }
  }
}

#else

bool neon_compiled() { return false; }
double dot_neon(const double* a, const double* b, std::size_t n) { return dot_scalar(a, b, n); }
void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  axpy_scalar(alpha, x, y, n);
}
void add_inplace_neon(const double* x, double* y, std::size_t n) { add_inplace_scalar(x, y, n); }
void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c) {
  gemm_scalar(m, n, k, a, a_rs, a_cs, b, b_rs, b_cs, c);
}

#endif

}  // namespace spinrect::kernels::detail
