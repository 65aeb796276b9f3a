// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "op_util.hpp"
#include "spinrect/kernels.hpp"
#include "spinrect/ops.hpp"

namespace spinrect {
using detail::grad_of;
using detail::out_grad;

Tensor matmul(const Tensor& a, const Tensor& b) {
  const bool batched = a.rank() == 3;
  if (!((a.rank() == 2 && b.rank() == 2) || (batched && b.rank() == 3))) {
    detail::shape_fail("matmul", "unsupported ranks " + shape_str(a.shape()) + " x " +
                                     shape_str(b.shape()));
  }
  const std::size_t batch = batched ? a.dim(0) : 1;
  const std::size_t m = a.dim(a.rank() - 2);
  const std::size_t k = a.dim(a.rank() - 1);
  const std::size_t n = b.dim(b.rank() - 1);
  if (b.dim(b.rank() - 2) != k || (batched && b.dim(0) != batch)) {
    detail::shape_fail("matmul", "shape mismatch " + shape_str(a.shape()) + " x " +
                                     shape_str(b.shape()));
  }
  std::vector<double> out(batch * m * n, 0.0);
  for (std::size_t i = 0; i < batch; ++i) {
    kernels::gemm_nn(m, n, k, a.data().data() + i * m * k, b.data().data() + i * k * n,
                     out.data() + i * m * n);
  }
  Shape shape = batched ? Shape{batch, m, n} : Shape{m, n};
  Tensor y = Tensor::make_result(std::move(shape), std::move(out));
  return detail::maybe_record("matmul", {a, b}, y, [a, b, y, batch, m, n, k] {
    const double* gy = out_grad(y);
    double* ga = grad_of(a);
    double* gb = grad_of(b);
    for (std::size_t i = 0; i < batch; ++i) {
      const double* gyi = gy + i * m * n;
      if (ga) kernels::gemm_nt(m, k, n, gyi, b.data().data() + i * k * n, ga + i * m * k);
      if (gb) kernels::gemm_tn(k, n, m, a.data().data() + i * m * k, gyi, gb + i * k * n);
    }
  });
}

namespace {

// Unfolds one (channels, h, w) image into rows of a patch matrix for a 3x3
// stride-1 zero-padded convolution: row (c*3+ky)*3+kx, columns
// [0, h*w) relative to `col`, consecutive rows `ld` apart.
void im2col(const double* img, std::size_t channels, std::size_t h, std::size_t w,
            double* col, std::size_t ld) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = col + ((c * 3 + ky) * 3 + kx) * ld;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          for (std::size_t x = 0; x < w; ++x) {
            const long sx = static_cast<long>(x) + kx - 1;
            const bool inside = sy >= 0 && sy < static_cast<long>(h) && sx >= 0 &&
                                sx < static_cast<long>(w);
            row[y * w + x] = inside ? img[(c * h + sy) * w + sx] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* col, std::size_t ld, std::size_t channels, std::size_t h,
            std::size_t w, double* img) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = col + ((c * 3 + ky) * 3 + kx) * ld;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          for (std::size_t x = 0; x < w; ++x) {
            const long sx = static_cast<long>(x) + kx - 1;
            if (sx < 0 || sx >= static_cast<long>(w)) continue;
            img[(c * h + sy) * w + sx] += row[y * w + x];
          }
        }
      }
    }
  }
}

// Patch matrix of the whole batch, (cin*9, batch*h*w).
std::vector<double> unfold(const Tensor& x) {
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t hw = h * w, ld = batch * hw;
  std::vector<double> col(cin * 9 * ld);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col(x.data().data() + b * cin * hw, cin, h, w, col.data() + b * hw, ld);
  }
  return col;
}

}  // namespace

// The whole batch is one GEMM, (cout, cin*9) x (cin*9, batch*h*w). Each
// output element accumulates over the patch in the same order regardless
// of batch size, so results are batch-independent.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  detail::require_rank("conv2d", x, 4);
  detail::require_rank("conv2d", weight, 4);
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = weight.dim(0);
  if (weight.dim(1) != cin || weight.dim(2) != 3 || weight.dim(3) != 3) {
    detail::shape_fail("conv2d", "weight " + shape_str(weight.shape()) +
                                     " does not fit input " + shape_str(x.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{cout}) {
    detail::shape_fail("conv2d", "bias " + shape_str(bias.shape()) + " for " +
                                     std::to_string(cout) + " output channels");
  }
  const std::size_t hw = h * w, ld = batch * hw;
  const std::size_t patch = cin * 9;
  const std::vector<double> col = unfold(x);
  std::vector<double> flat(cout * ld, 0.0);
  if (has_bias) {
    for (std::size_t o = 0; o < cout; ++o) std::fill_n(flat.data() + o * ld, ld, bias.data()[o]);
  }
  kernels::gemm_nn(cout, ld, patch, weight.data().data(), col.data(), flat.data());
  std::vector<double> out(batch * cout * hw);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      std::copy_n(flat.data() + o * ld + b * hw, hw, out.data() + (b * cout + o) * hw);
    }
  }
  Tensor y = Tensor::make_result({batch, cout, h, w}, std::move(out));
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return detail::maybe_record(
      "conv2d", std::move(inputs), y, [x, weight, bias, y, batch, cin, cout, h, w] {
        const std::size_t hw = h * w, ld = batch * hw;
        const std::size_t patch = cin * 9;
        const double* gy = out_grad(y);
        double* gx = grad_of(x);
        double* gw = grad_of(weight);
        double* gbias = bias.defined() ? grad_of(bias) : nullptr;
        std::vector<double> gflat(cout * ld);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t o = 0; o < cout; ++o) {
            std::copy_n(gy + (b * cout + o) * hw, hw, gflat.data() + o * ld + b * hw);
          }
        }
        if (gbias) {
          for (std::size_t o = 0; o < cout; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < ld; ++i) s += gflat[o * ld + i];
            gbias[o] += s;
          }
        }
        if (gw) {
          const std::vector<double> col = unfold(x);
          kernels::gemm_nt(cout, patch, ld, gflat.data(), col.data(), gw);
        }
        if (gx) {
          std::vector<double> dcol(patch * ld, 0.0);
          kernels::gemm_tn(patch, ld, cout, weight.data().data(), gflat.data(), dcol.data());
          for (std::size_t b = 0; b < batch; ++b) {
            col2im(dcol.data() + b * hw, ld, cin, h, w, gx + b * cin * hw);
          }
        }
      });
}

}  // namespace spinrect
