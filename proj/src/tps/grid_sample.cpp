// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "../tensor/op_util.hpp"
#include "spinrect/tps.hpp"

namespace spinrect::tps {
using detail::grad_of;
using detail::out_grad;

namespace {

constexpr double kSnap = 1e-9;

// Pixel-space source position for a normalized coordinate.
double unnormalize(double g, std::size_t extent) {
  double pos = (g + 1.0) * 0.5 * static_cast<double>(extent - 1);
  // Far outside the image every tap is padding; keep the index arithmetic bounded.
  if (!std::isfinite(pos)) return -2.0;
  pos = std::clamp(pos, -2.0, static_cast<double>(extent) + 1.0);
  const double nearest = std::round(pos);
  return std::abs(pos - nearest) < kSnap ? nearest : pos;
}

struct Corners {
  long x0, y0;
  double wx, wy;  // weights of x0+1 / y0+1
};

Corners corners(double gx, double gy, std::size_t h, std::size_t w) {
  const double ix = unnormalize(gx, w);
  const double iy = unnormalize(gy, h);
  const double fx = std::floor(ix);
  const double fy = std::floor(iy);
  return {static_cast<long>(fx), static_cast<long>(fy), ix - fx, iy - fy};
}

}  // namespace

Tensor grid_sample(const Tensor& image, const SamplingGrid& grid) {
  detail::require_rank("grid_sample", image, 4);
  detail::require_rank("grid_sample", grid.x, 3);
  detail::require_same_shape("grid_sample", grid.x, grid.y);
  const std::size_t batch = image.dim(0), channels = image.dim(1);
  const std::size_t h = image.dim(2), w = image.dim(3);
  if (grid.x.dim(0) != batch) {
    detail::shape_fail("grid_sample", "grid batch " + shape_str(grid.x.shape()) +
                                          " vs image " + shape_str(image.shape()));
  }
  if (h < 2 || w < 2) detail::shape_fail("grid_sample", "image must be at least 2x2");
  const std::size_t oh = grid.x.dim(1), ow = grid.x.dim(2);
  const auto in = image.data();
  const auto gxs = grid.x.data();
  const auto gys = grid.y.data();

  auto pixel = [&](std::size_t plane, long y, long x) {
    if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) return 0.0;
    return in[(plane * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
  };

  std::vector<double> out(batch * channels * oh * ow);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t p = 0; p < oh * ow; ++p) {
      const Corners c = corners(gxs[b * oh * ow + p], gys[b * oh * ow + p], h, w);
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const std::size_t plane = b * channels + ch;
        const double top = pixel(plane, c.y0, c.x0) * (1.0 - c.wx) + pixel(plane, c.y0, c.x0 + 1) * c.wx;
        const double bot =
            pixel(plane, c.y0 + 1, c.x0) * (1.0 - c.wx) + pixel(plane, c.y0 + 1, c.x0 + 1) * c.wx;
        out[plane * oh * ow + p] = top * (1.0 - c.wy) + bot * c.wy;
      }
    }
  }
  Tensor y = Tensor::make_result({batch, channels, oh, ow}, std::move(out));
  return detail::maybe_record(
      "grid_sample", {image, grid.x, grid.y}, y,
      [image, gx = grid.x, gy = grid.y, y, batch, channels, h, w, oh, ow] {
        const double* go = out_grad(y);
        double* gimg = grad_of(image);
        double* ggx = grad_of(gx);
        double* ggy = grad_of(gy);
        const auto in = image.data();
        const auto gxs = gx.data();
        const auto gys = gy.data();
        auto inside = [&](long yy, long xx) {
          return xx >= 0 && yy >= 0 && xx < static_cast<long>(w) && yy < static_cast<long>(h);
        };
        auto value = [&](std::size_t plane, long yy, long xx) {
          return inside(yy, xx)
                     ? in[(plane * h + static_cast<std::size_t>(yy)) * w + static_cast<std::size_t>(xx)]
                     : 0.0;
        };
        const double sx = 0.5 * static_cast<double>(w - 1);
        const double sy = 0.5 * static_cast<double>(h - 1);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t p = 0; p < oh * ow; ++p) {
            const std::size_t gi = b * oh * ow + p;
            const Corners c = corners(gxs[gi], gys[gi], h, w);
            double dgx = 0.0, dgy = 0.0;
            for (std::size_t ch = 0; ch < channels; ++ch) {
              const std::size_t plane = b * channels + ch;
              const double g = go[plane * oh * ow + p];
              if (g == 0.0) continue;
              const double v00 = value(plane, c.y0, c.x0), v01 = value(plane, c.y0, c.x0 + 1);
              const double v10 = value(plane, c.y0 + 1, c.x0), v11 = value(plane, c.y0 + 1, c.x0 + 1);
              dgx += g * ((1.0 - c.wy) * (v01 - v00) + c.wy * (v11 - v10));
              dgy += g * ((1.0 - c.wx) * (v10 - v00) + c.wx * (v11 - v01));
              if (gimg) {
                const long ys[2] = {c.y0, c.y0 + 1};
                const long xs[2] = {c.x0, c.x0 + 1};
                const double wys[2] = {1.0 - c.wy, c.wy};
                const double wxs[2] = {1.0 - c.wx, c.wx};
                for (int a = 0; a < 2; ++a) {
                  for (int d = 0; d < 2; ++d) {
                    if (!inside(ys[a], xs[d])) continue;
                    gimg[(plane * h + static_cast<std::size_t>(ys[a])) * w +
                         static_cast<std::size_t>(xs[d])] += g * wys[a] * wxs[d];
                  }
                }
              }
            }
            if (ggx) ggx[gi] += dgx * sx;
            if (ggy) ggy[gi] += dgy * sy;
          }
        }
      });
}

}  // namespace spinrect::tps
