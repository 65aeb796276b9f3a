// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "spinrect/spt.hpp"

namespace spinrect::spt {

double round2(double value) { return std::round(value * 100.0) / 100.0; }

ExponentBank ExponentBank::build(std::size_t k) {
  ExponentBank bank;
  bank.k_ = k;
  bank.betas_.resize(2 * k + 1);
  const double denom = 2.0 * static_cast<double>(k + 1);
  for (std::size_t i = 1; i <= k + 1; ++i) {
    const double t = static_cast<double>(i) / denom;
    bank.betas_[i - 1] = round2(std::log(1.0 - t) / std::log(t));
  }
  // i = K+1 gives log(1/2)/log(1/2); pin it against rounding noise.
  bank.betas_[k] = 1.0;
  for (std::size_t i = k + 2; i <= 2 * k + 1; ++i) {
    bank.betas_[i - 1] = round2(1.0 / bank.betas_[i - 1 - (k + 1)]);
  }
  return bank;
}

}  // namespace spinrect::spt
