// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Structure-preserving intensity transform: a sigmoid of a weighted sum of
// power functions of each pixel, with a fixed bank of exponents.

#pragma once

#include <cstddef>
#include <vector>

#include "spinrect/tensor.hpp"

namespace spinrect::spt {

/// Rounds to two decimals, halves away from zero.
double round2(double value);

/// The 2K+1 fixed exponents. Entry K is exactly 1; entries below K are
/// the paired exponents in (0, 1) and entries above K their rounded
/// reciprocals.
class ExponentBank {
 public:
  static ExponentBank build(std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t size() const { return betas_.size(); }
  /// Index of the exponent 1.00.
  std::size_t identity_index() const { return k_; }
  const std::vector<double>& betas() const { return betas_; }
  double operator[](std::size_t i) const { return betas_.at(i); }

  bool operator==(const ExponentBank&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> betas_;
};

/// sigmoid(sum_i omega[b, i] * x[b, ...]^beta_i) for every pixel of image b.
/// x is (batch, ...) with values in [0, 1]; omega is (batch, bank.size()).
Tensor transform(const Tensor& x, const Tensor& omega, const ExponentBank& bank);

}  // namespace spinrect::spt
