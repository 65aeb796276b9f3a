// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operations. Image tensors are laid out (batch, channel,
// height, width). Binary elementwise operations require identical shapes;
// use expand() for the few places that broadcast.

#pragma once

#include <span>
#include <vector>

#include "spinrect/tensor.hpp"

namespace spinrect {

// Elementwise.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

/// Smallest base fed to pow() when the exponent is fractional and below 1.
inline constexpr double kPowBaseFloor = 1e-6;

/// x^exponent with a constant exponent. For fractional exponents below 1
/// the base is clamped to kPowBaseFloor first (the clamped region has zero
/// derivative). Negative bases are only accepted for integer exponents.
Tensor pow(const Tensor& x, double exponent);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor relu(const Tensor& x);

/// Softmax over the last axis.
Tensor softmax(const Tensor& x);

/// Sum of all elements, as a rank-0 tensor.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// (m,k) x (k,n) -> (m,n), or batched (b,m,k) x (b,k,n) -> (b,m,n).
Tensor matmul(const Tensor& a, const Tensor& b);

/// 3x3 convolution, stride 1, one pixel of zero padding. weight is
/// (out, in, 3, 3); bias is (out) or undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Max pooling without padding; output extent floor((n - k) / s) + 1.
/// Ties resolve to the first element in row-major window order.
Tensor maxpool2d(const Tensor& x, std::size_t kernel_h, std::size_t kernel_w,
                 std::size_t stride_h, std::size_t stride_w);

/// (b,c,h,w) -> (b,c)
Tensor global_avg_pool(const Tensor& x);

/// Per-channel statistics of a (b,c,h,w) batch, biased variance.
struct ChannelStats {
  std::vector<double> mean, var;
};

/// Normalizes each channel of (b,c,h,w) with its batch statistics, then
/// applies gamma and beta, both (c). Fills `stats` when given.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  ChannelStats* stats = nullptr);

/// x * scale[c] + shift[c] over (b,c,h,w); scale and shift are (c).
Tensor channel_affine(const Tensor& x, const Tensor& scale, const Tensor& shift);

/// Align-corners bilinear resize of (b,c,h,w) to (b,c,out_h,out_w).
Tensor resize_bilinear(const Tensor& x, std::size_t out_h, std::size_t out_w);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);

/// Broadcasts axes of extent 1 to the target shape (same rank).
Tensor expand(const Tensor& x, Shape shape);

/// Sum over rows of -log softmax(logits)[row, target]. logits is (n, classes);
/// rows whose target is negative are ignored.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);

}  // namespace spinrect
