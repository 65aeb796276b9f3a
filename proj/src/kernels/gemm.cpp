// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/kernels.hpp"

namespace spinrect::kernels {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  active().gemm(m, n, k, a, k, 1, b, n, 1, c);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  active().gemm(m, n, k, a, 1, m, b, n, 1, c);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  active().gemm(m, n, k, a, k, 1, b, 1, k, c);
}

}  // namespace spinrect::kernels
