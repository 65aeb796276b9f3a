// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "op_util.hpp"
#include "spinrect/ops.hpp"

namespace spinrect {
using detail::grad_of;
using detail::out_grad;

Tensor maxpool2d(const Tensor& x, std::size_t kernel_h, std::size_t kernel_w,
                 std::size_t stride_h, std::size_t stride_w) {
  detail::require_rank("maxpool2d", x, 4);
  if (kernel_h == 0 || kernel_w == 0 || stride_h == 0 || stride_w == 0) {
    detail::shape_fail("maxpool2d", "kernel and stride must be positive");
  }
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < kernel_h || w < kernel_w) {
    detail::shape_fail("maxpool2d", "kernel " + std::to_string(kernel_h) + "x" +
                                        std::to_string(kernel_w) + " larger than input " +
                                        shape_str(x.shape()));
  }
  const std::size_t oh = (h - kernel_h) / stride_h + 1;
  const std::size_t ow = (w - kernel_w) / stride_w + 1;
  std::vector<double> out(planes * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (p * h + oy * stride_h) * w + ox * stride_w;
        for (std::size_t ky = 0; ky < kernel_h; ++ky) {
          for (std::size_t kx = 0; kx < kernel_w; ++kx) {
            const std::size_t idx = (p * h + oy * stride_h + ky) * w + ox * stride_w + kx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
  Tensor y = Tensor::make_result({x.dim(0), x.dim(1), oh, ow}, std::move(out));
  return detail::maybe_record("maxpool2d", {x}, y, [x, y, argmax = std::move(argmax)] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    for (std::size_t o = 0; o < argmax.size(); ++o) gx[argmax[o]] += gy[o];
  });
}

Tensor global_avg_pool(const Tensor& x) {
  detail::require_rank("global_avg_pool", x, 4);
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  if (hw == 0) detail::shape_fail("global_avg_pool", "empty spatial extent");
  std::vector<double> out(planes);
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += in[p * hw + i];
    out[p] = s / static_cast<double>(hw);
  }
  Tensor y = Tensor::make_result({x.dim(0), x.dim(1)}, std::move(out));
  return detail::maybe_record("global_avg_pool", {x}, y, [x, y, planes, hw] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t p = 0; p < planes; ++p) {
      for (std::size_t i = 0; i < hw; ++i) gx[p * hw + i] += gy[p] * inv;
    }
  });
}

namespace {

struct Tap {
  std::size_t lo, hi;
  double frac;  // weight of hi
};

// Align-corners source positions for each output index.
std::vector<Tap> resize_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  for (std::size_t i = 0; i < out; ++i) {
    if (in == 1 || out == 1) {
      taps[i] = {0, 0, 0.0};
      continue;
    }
    const double pos = static_cast<double>(i) * static_cast<double>(in - 1) /
                       static_cast<double>(out - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= in - 1) lo = in - 1;
    const std::size_t hi = lo + 1 < in ? lo + 1 : lo;
    taps[i] = {lo, hi, pos - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

Tensor resize_bilinear(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  detail::require_rank("resize_bilinear", x, 4);
  if (out_h == 0 || out_w == 0) detail::shape_fail("resize_bilinear", "empty output size");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto ty = resize_taps(h, out_h);
  const auto tx = resize_taps(w, out_w);
  std::vector<double> out(planes * out_h * out_w);
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const Tap& a = ty[oy];
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const Tap& b = tx[ox];
        const double top = src[a.lo * w + b.lo] * (1.0 - b.frac) + src[a.lo * w + b.hi] * b.frac;
        const double bot = src[a.hi * w + b.lo] * (1.0 - b.frac) + src[a.hi * w + b.hi] * b.frac;
        out[(p * out_h + oy) * out_w + ox] = top * (1.0 - a.frac) + bot * a.frac;
      }
    }
  }
  Tensor y = Tensor::make_result({x.dim(0), x.dim(1), out_h, out_w}, std::move(out));
  return detail::maybe_record("resize_bilinear", {x}, y, [x, y, ty, tx, planes, h, w] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    const std::size_t out_h = ty.size(), out_w = tx.size();
    for (std::size_t p = 0; p < planes; ++p) {
      double* dst = gx + p * h * w;
      for (std::size_t oy = 0; oy < out_h; ++oy) {
        const Tap& a = ty[oy];
        for (std::size_t ox = 0; ox < out_w; ++ox) {
          const Tap& b = tx[ox];
          const double g = gy[(p * out_h + oy) * out_w + ox];
          dst[a.lo * w + b.lo] += g * (1.0 - a.frac) * (1.0 - b.frac);
          dst[a.lo * w + b.hi] += g * (1.0 - a.frac) * b.frac;
          dst[a.hi * w + b.lo] += g * a.frac * (1.0 - b.frac);
          dst[a.hi * w + b.hi] += g * a.frac * b.frac;
        }
      }
    }
  });
}

}  // namespace spinrect
