// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "op_util.hpp"
#include "spinrect/ops.hpp"

namespace spinrect {
using detail::grad_of;
using detail::out_grad;

namespace {

void require_channel_vector(std::string_view op, const Tensor& x, const Tensor& v) {
  if (v.rank() != 1 || v.dim(0) != x.dim(1)) {
    detail::shape_fail(op, "per-channel vector " + shape_str(v.shape()) + " does not match input " +
                               shape_str(x.shape()));
  }
}

}  // namespace

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                  ChannelStats* stats) {
  detail::require_rank("batch_norm", x, 4);
  require_channel_vector("batch_norm", x, gamma);
  require_channel_vector("batch_norm", x, beta);
  const std::size_t batch = x.dim(0), ch = x.dim(1), hw = x.dim(2) * x.dim(3);
  const std::size_t count = batch * hw;
  if (count == 0) detail::shape_fail("batch_norm", "empty batch");
  const auto in = x.data();
  const auto g = gamma.data();
  const auto b = beta.data();
  std::vector<double> mean(ch, 0.0), var(ch, 0.0), inv_std(ch);
  for (std::size_t c = 0; c < ch; ++c) {
    double s = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const double* p = in.data() + (n * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) s += p[i];
    }
    mean[c] = s / static_cast<double>(count);
    double q = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const double* p = in.data() + (n * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) q += (p[i] - mean[c]) * (p[i] - mean[c]);
    }
    var[c] = q / static_cast<double>(count);
    inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  }
  std::vector<double> xhat(x.numel()), out(x.numel());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t base = (n * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        xhat[base + i] = (in[base + i] - mean[c]) * inv_std[c];
        out[base + i] = g[c] * xhat[base + i] + b[c];
      }
    }
  }
  if (stats) *stats = {mean, var};
  Tensor y = Tensor::make_result(x.shape(), std::move(out));
  return detail::maybe_record(
      "batch_norm", {x, gamma, beta}, y,
      [x, gamma, beta, y, xhat = std::move(xhat), inv_std = std::move(inv_std), batch, ch, hw] {
        const double* gy = out_grad(y);
        std::vector<double> sum_g(ch, 0.0), sum_gx(ch, 0.0);
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              sum_g[c] += gy[base + i];
              sum_gx[c] += gy[base + i] * xhat[base + i];
            }
          }
        }
        if (double* gb = grad_of(beta)) {
          for (std::size_t c = 0; c < ch; ++c) gb[c] += sum_g[c];
        }
        if (double* gg = grad_of(gamma)) {
          for (std::size_t c = 0; c < ch; ++c) gg[c] += sum_gx[c];
        }
        double* gx = grad_of(x);
        if (!gx) return;
        const auto gm = gamma.data();
        const double inv_count = 1.0 / static_cast<double>(batch * hw);
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * hw;
            const double k = gm[c] * inv_std[c];
            for (std::size_t i = 0; i < hw; ++i) {
              gx[base + i] +=
                  k * (gy[base + i] - inv_count * (sum_g[c] + xhat[base + i] * sum_gx[c]));
            }
          }
        }
      });
}

Tensor channel_affine(const Tensor& x, const Tensor& scale, const Tensor& shift) {
  detail::require_rank("channel_affine", x, 4);
  require_channel_vector("channel_affine", x, scale);
  require_channel_vector("channel_affine", x, shift);
  const std::size_t batch = x.dim(0), ch = x.dim(1), hw = x.dim(2) * x.dim(3);
  const auto in = x.data();
  const auto a = scale.data();
  const auto b = shift.data();
  std::vector<double> out(x.numel());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t base = (n * ch + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) out[base + i] = in[base + i] * a[c] + b[c];
    }
  }
  Tensor y = Tensor::make_result(x.shape(), std::move(out));
  return detail::maybe_record("channel_affine", {x, scale, shift}, y, [x, scale, shift, y, batch, ch, hw] {
    const double* gy = out_grad(y);
    double* gx = grad_of(x);
    double* ga = grad_of(scale);
    double* gb = grad_of(shift);
    const auto xs = x.data();
    const auto a = scale.data();
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t c = 0; c < ch; ++c) {
        const std::size_t base = (n * ch + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          if (gx) gx[base + i] += gy[base + i] * a[c];
          if (ga) ga[c] += gy[base + i] * xs[base + i];
          if (gb) gb[c] += gy[base + i];
        }
      }
    }
  });
}

}  // namespace spinrect
