// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inner-loop arithmetic kernels. Every kernel has a scalar reference
// implementation and, where the target supports it, a vectorized variant.
// The variant is chosen once per process from CPU features; setting
// SPINRECT_ISA=scalar|avx2|neon forces a particular table.
//
// Vectorized and scalar kernels agree to within rounding (reassociated
// sums in dot(), fused multiply-add in axpy() and gemm()), not bit-for-bit. A single
// process always uses one table, so runs on one machine stay reproducible.

#pragma once

#include <cstddef>
#include <string_view>

namespace spinrect::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[i] += x[i]
  void (*add_inplace)(const double* x, double* y, std::size_t n);
  /// C[m x n] (row-major, contiguous) += A * B with A(i, p) at
  /// a[i * a_rs + p * a_cs] and B(p, j) at b[p * b_rs + j * b_cs]. Each
  /// element accumulates over p in ascending order, so a value does not
  /// depend on m, n or its position.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c);
};

bool available(Isa isa);

/// Table for a specific ISA; throws std::runtime_error if the CPU or the
/// build does not support it.
const KernelTable& table(Isa isa);

/// The process-wide table selected at first use.
const KernelTable& active();

// Row-major GEMM helpers over the active table's gemm. All accumulate into C.

/// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);
/// C[m x n] += A^T * B, with A stored [k x m] and B stored [k x n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);
/// C[m x n] += A * B^T, with A stored [m x k] and B stored [n x k]
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c);

namespace detail {
// Per-ISA entry points, defined in kernels_<isa>.cpp.
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void add_inplace_scalar(const double* x, double* y, std::size_t n);
void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c);

bool avx2_compiled();
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void add_inplace_avx2(const double* x, double* y, std::size_t n);
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c);

bool neon_compiled();
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
void add_inplace_neon(const double* x, double* y, std::size_t n);
void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
               std::size_t a_cs, const double* b, std::size_t b_rs, std::size_t b_cs, double* c);
}  // namespace detail

}  // namespace spinrect::kernels
