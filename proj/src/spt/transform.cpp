// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/ops.hpp"
#include "spinrect/spt.hpp"

namespace spinrect::spt {

Tensor transform(const Tensor& x, const Tensor& omega, const ExponentBank& bank) {
  if (x.rank() < 1 || omega.rank() != 2 || omega.dim(0) != x.dim(0) ||
      omega.dim(1) != bank.size()) {
    throw ShapeError("spt::transform: weights " + shape_str(omega.shape()) + " do not match " +
                     std::to_string(bank.size()) + " exponents for input " +
                     shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  Shape per_image(x.rank(), 1);
  per_image[0] = batch;
  Tensor acc;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const Tensor w = expand(reshape(slice(omega, 1, i, i + 1), per_image), x.shape());
    const Tensor term = mul(w, pow(x, bank[i]));
    acc = acc.defined() ? add(acc, term) : term;
  }
  return sigmoid(acc);
}

}  // namespace spinrect::spt
