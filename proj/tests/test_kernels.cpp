// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "spinrect/kernels.hpp"
#include "spinrect/random.hpp"

using namespace spinrect;
using namespace spinrect::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

std::vector<Isa> vector_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (available(isa)) out.push_back(isa);
  }
  return out;
}

// Reference C += op(A) op(B) in long double.
std::vector<double> reference_gemm(std::size_t m, std::size_t n, std::size_t k,
                                   const std::vector<double>& a, std::size_t a_rs, std::size_t a_cs,
                                   const std::vector<double>& b, std::size_t b_rs, std::size_t b_cs,
                                   std::vector<double> c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = c[i * n + j];
      for (std::size_t p = 0; p < k; ++p) {
        s += static_cast<long double>(a[i * a_rs + p * a_cs]) * b[p * b_rs + j * b_cs];
      }
      c[i * n + j] = static_cast<double>(s);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("dispatch") {
  CHECK(available(Isa::scalar));
  CHECK(table(Isa::scalar).isa == Isa::scalar);
  CHECK(isa_name(active().isa).size() > 0);
  if (!available(Isa::neon)) CHECK_THROWS_AS(table(Isa::neon), std::runtime_error);
}

TEST_CASE("vector kernels match the scalar reference") {
  const KernelTable& ref = table(Isa::scalar);
  for (Isa isa : vector_isas()) {
    const KernelTable& t = table(isa);
    CAPTURE(isa_name(isa));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
      CAPTURE(n);
      const auto a = random_vec(n, 10 + n), b = random_vec(n, 20 + n);
      const double d_ref = ref.dot(a.data(), b.data(), n);
      const double d = t.dot(a.data(), b.data(), n);
      CHECK(std::abs(d - d_ref) <= 1e-13 * (1.0 + static_cast<double>(n)));

      auto y_ref = b, y = b;
      ref.axpy(0.37, a.data(), y_ref.data(), n);
      t.axpy(0.37, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - y_ref[i]) <= 1e-15);

      auto s_ref = b, s = b;
      ref.add_inplace(a.data(), s_ref.data(), n);
      t.add_inplace(a.data(), s.data(), n);
      CHECK(s == s_ref);
    }
  }
}

TEST_CASE("gemm layouts agree with a direct product on every kernel set") {
  std::vector<Isa> isas = vector_isas();
  isas.push_back(Isa::scalar);
  struct Dims {
    std::size_t m, n, k;
  };
  for (Isa isa : isas) {
    const KernelTable& t = table(isa);
    for (Dims d : {Dims{1, 1, 1}, Dims{3, 5, 2}, Dims{4, 8, 7}, Dims{9, 17, 300}, Dims{13, 1, 40},
                   Dims{6, 33, 513}}) {
      CAPTURE(isa_name(isa));
      CAPTURE(d.m);
      CAPTURE(d.n);
      CAPTURE(d.k);
      const auto a = random_vec(d.m * d.k, 1), b = random_vec(d.k * d.n, 2), c0 = random_vec(d.m * d.n, 3);
      // (rs, cs) pairs: A row-major, A stored transposed; B row-major, B stored transposed.
      const std::size_t a_layouts[2][2] = {{d.k, 1}, {1, d.m}};
      const std::size_t b_layouts[2][2] = {{d.n, 1}, {1, d.k}};
      for (const auto& al : a_layouts) {
        for (const auto& bl : b_layouts) {
          const auto expect = reference_gemm(d.m, d.n, d.k, a, al[0], al[1], b, bl[0], bl[1], c0);
          auto c = c0;
          t.gemm(d.m, d.n, d.k, a.data(), al[0], al[1], b.data(), bl[0], bl[1], c.data());
          for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(std::abs(c[i] - expect[i]) <= 1e-14 * static_cast<double>(d.k + 1));
          }
        }
      }
    }
  }
}

TEST_CASE("gemm elements do not depend on matrix extent") {
  std::vector<Isa> isas = vector_isas();
  isas.push_back(Isa::scalar);
  const std::size_t m = 11, n = 21, k = 290;
  const auto a = random_vec(m * k, 4), b = random_vec(k * n, 5);
  for (Isa isa : isas) {
    CAPTURE(isa_name(isa));
    const KernelTable& t = table(isa);
    std::vector<double> full(m * n, 0.0);
    t.gemm(m, n, k, a.data(), k, 1, b.data(), n, 1, full.data());
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row(n, 0.0);
      t.gemm(1, n, k, a.data() + i * k, k, 1, b.data(), n, 1, row.data());
      for (std::size_t j = 0; j < n; ++j) CHECK(row[j] == full[i * n + j]);
      // A single column sliced out of B.
      for (std::size_t j : {0u, 9u, 20u}) {
        double one = 0.0;
        t.gemm(1, 1, k, a.data() + i * k, k, 1, b.data() + j, n, 1, &one);
        CHECK(one == full[i * n + j]);
      }
    }
  }
}

TEST_CASE("gemm helpers map onto the documented layouts") {
  const std::size_t m = 5, n = 6, k = 7;
  const auto a = random_vec(m * k, 6), b = random_vec(k * n, 7);
  std::vector<double> at(k * m), bt(n * k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
  }
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  }
  std::vector<double> nn(m * n, 0.0), tn(m * n, 0.0), nt(m * n, 0.0);
  gemm_nn(m, n, k, a.data(), b.data(), nn.data());
  gemm_tn(m, n, k, at.data(), b.data(), tn.data());
  gemm_nt(m, n, k, a.data(), bt.data(), nt.data());
  CHECK(nn == tn);
  CHECK(nn == nt);
}
