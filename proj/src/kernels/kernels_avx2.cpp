// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Compiled with -mavx2 -mfma. Keep this file free of standard-library
// headers: inline functions instantiated here would carry AVX2 code into
// the rest of the binary.

#include "spinrect/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define SPINRECT_HAVE_AVX2 1
#else
#define SPINRECT_HAVE_AVX2 0
#endif

namespace spinrect::kernels::detail {

#if SPINRECT_HAVE_AVX2

bool avx2_compiled() { return true; }

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) acc = __builtin_fma(a[i], b[i], acc);
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  // Tail uses the same fused rounding as the vector lanes.
  for (; i < n; ++i) y[i] = __builtin_fma(alpha, x[i], y[i]);
}

void add_inplace_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

namespace {

constexpr std::size_t kPanel = 256;  // depth of a packed B strip

// Rows [i0, i0 + R) times one packed 8-column strip of depth kc.
template <int R>
void micro(const double* a, std::size_t a_rs, std::size_t a_cs, const double* strip,
           std::size_t kc, double* c, std::size_t ldc) {
  __m256d lo[R], hi[R];
  for (int r = 0; r < R; ++r) {
    lo[r] = _mm256_loadu_pd(c + r * ldc);
    hi[r] = _mm256_loadu_pd(c + r * ldc + 4);
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_load_pd(strip + p * 8);
    const __m256d b1 = _mm256_load_pd(strip + p * 8 + 4);
    for (int r = 0; r < R; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + r * a_rs + p * a_cs);
      lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
      hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    _mm256_storeu_pd(c + r * ldc, lo[r]);
    _mm256_storeu_pd(c + r * ldc + 4, hi[r]);
  }
}

}  // namespace

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c) {
  alignas(32) double strip[kPanel * 8];
  for (std::size_t p0 = 0; p0 < k; p0 += kPanel) {
    const std::size_t kc = k - p0 < kPanel ? k - p0 : kPanel;
    const double* ap = a + p0 * a_cs;
    const double* bp = b + p0 * b_rs;
    std::size_t j0 = 0;
    for (; j0 + 8 <= n; j0 += 8) {
      for (std::size_t p = 0; p < kc; ++p) {
        for (std::size_t jj = 0; jj < 8; ++jj) strip[p * 8 + jj] = bp[p * b_rs + (j0 + jj) * b_cs];
      }
      std::size_t i0 = 0;
      for (; i0 + 4 <= m; i0 += 4) micro<4>(ap + i0 * a_rs, a_rs, a_cs, strip, kc, c + i0 * n + j0, n);
      for (; i0 < m; ++i0) micro<1>(ap + i0 * a_rs, a_rs, a_cs, strip, kc, c + i0 * n + j0, n);
    }
    // Leftover columns, same fused ascending-p accumulation.
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = j0; j < n; ++j) {
        double acc = c[i * n + j];
        for (std::size_t p = 0; p < kc; ++p) {
          acc = __builtin_fma(ap[i * a_rs + p * a_cs], bp[p * b_rs + j * b_cs], acc);
        }
        c[i * n + j] = acc;
      }
    }
  }
}

#else

bool avx2_compiled() { return false; }
double dot_avx2(const double* a, const double* b, std::size_t n) { return dot_scalar(a, b, n); }
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  axpy_scalar(alpha, x, y, n);
}
void add_inplace_avx2(const double* x, double* y, std::size_t n) { add_inplace_scalar(x, y, n); }
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c) {
  gemm_scalar(m, n, k, a, a_rs, a_cs, b, b_rs, b_cs, c);
}

#endif

}  // namespace spinrect::kernels::detail
