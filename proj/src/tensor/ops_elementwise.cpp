// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "op_util.hpp"
#include "spinrect/ops.hpp"

namespace spinrect {
using detail::grad_of;
using detail::out_grad;

namespace {

// y = f(x) pointwise; dydx(x, y) gives the local derivative.
template <class Fwd, class Deriv>
Tensor unary(std::string_view name, const Tensor& x, Fwd fwd, Deriv dydx) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  Tensor y = Tensor::make_result(x.shape(), std::move(out));
  return detail::maybe_record(name, {x}, y, [x, y, dydx] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    const auto xv = x.data();
    const auto yv = y.data();
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += gy[i] * dydx(xv[i], yv[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("add", a, b);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  Tensor y = Tensor::make_result(a.shape(), std::move(out));
  return detail::maybe_record("add", {a, b}, y, [a, b, y] {
    const double* gy = out_grad(y);
    const std::size_t n = y.numel();
    if (double* ga = grad_of(a)) for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i];
    if (double* gb = grad_of(b)) for (std::size_t i = 0; i < n; ++i) gb[i] += gy[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("sub", a, b);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  Tensor y = Tensor::make_result(a.shape(), std::move(out));
  return detail::maybe_record("sub", {a, b}, y, [a, b, y] {
    const double* gy = out_grad(y);
    const std::size_t n = y.numel();
    if (double* ga = grad_of(a)) for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i];
    if (double* gb = grad_of(b)) for (std::size_t i = 0; i < n; ++i) gb[i] -= gy[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("mul", a, b);
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  Tensor y = Tensor::make_result(a.shape(), std::move(out));
  return detail::maybe_record("mul", {a, b}, y, [a, b, y] {
    const double* gy = out_grad(y);
    const std::size_t n = y.numel();
    const auto av = a.data();
    const auto bv = b.data();
    if (double* ga = grad_of(a)) for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i] * bv[i];
    if (double* gb = grad_of(b)) for (std::size_t i = 0; i < n; ++i) gb[i] += gy[i] * av[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary("scale", a, [factor](double v) { return v * factor; },
               [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary("add_scalar", a, [offset](double v) { return v + offset; },
               [](double, double) { return 1.0; });
}

Tensor pow(const Tensor& x, double exponent) {
  const bool integral = std::floor(exponent) == exponent;
  if (!integral) {
    for (double v : x.data()) {
      if (v < 0.0) {
        throw DomainError("pow: negative base " + std::to_string(v) +
                          " with non-integer exponent " + std::to_string(exponent));
      }
    }
  }
  // Exponents below 1 have an unbounded derivative at 0; keep the base off 0.
  const bool clamp = exponent < 1.0 && !integral;
  auto base = [clamp](double v) { return clamp ? std::max(v, kPowBaseFloor) : v; };
  return unary(
      "pow", x, [=](double v) { return std::pow(base(v), exponent); },
      [=](double v, double) {
        if (clamp && v < kPowBaseFloor) return 0.0;
        if (exponent == 0.0) return 0.0;
        return exponent * std::pow(base(v), exponent - 1.0);
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary("exp", x, [](double v) { return std::exp(v); },
               [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
  }
  return unary("log", x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Tensor relu(const Tensor& x) {
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x) {
  if (x.rank() == 0) detail::shape_fail("softmax", "needs at least one axis");
  const std::size_t cols = x.shape().back();
  if (cols == 0) detail::shape_fail("softmax", "empty last axis");
  const std::size_t rows = x.numel() / cols;
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = in.data() + r * cols;
    double* dst = out.data() + r * cols;
    const double peak = *std::max_element(src, src + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += dst[c] = std::exp(src[c] - peak);
    for (std::size_t c = 0; c < cols; ++c) dst[c] /= total;
  }
  Tensor y = Tensor::make_result(x.shape(), std::move(out));
  return detail::maybe_record("softmax", {x}, y, [x, y, rows, cols] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    const auto yv = y.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t off = r * cols;
      double inner = 0.0;
      for (std::size_t c = 0; c < cols; ++c) inner += gy[off + c] * yv[off + c];
      for (std::size_t c = 0; c < cols; ++c) gx[off + c] += yv[off + c] * (gy[off + c] - inner);
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor y = Tensor::make_result({}, {total});
  return detail::maybe_record("sum", {x}, y, [x, y] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double g = out_grad(y)[0];
    for (std::size_t i = 0; i < x.numel(); ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) detail::shape_fail("mean", "empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  detail::require_rank("cross_entropy", logits, 2);
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  if (targets.size() != rows) {
    detail::shape_fail("cross_entropy", std::to_string(targets.size()) + " targets for " +
                                            std::to_string(rows) + " rows");
  }
  const auto in = logits.data();
  std::vector<double> probs(in.size());
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = in.data() + r * cols;
    double* p = probs.data() + r * cols;
    const double peak = *std::max_element(src, src + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += p[c] = std::exp(src[c] - peak);
    for (std::size_t c = 0; c < cols; ++c) p[c] /= z;
    const int t = targets[r];
    if (t < 0) continue;
    if (static_cast<std::size_t>(t) >= cols) {
      detail::shape_fail("cross_entropy", "target " + std::to_string(t) + " out of range for " +
                                              std::to_string(cols) + " classes");
    }
    total += -(src[t] - peak - std::log(z));
  }
  Tensor y = Tensor::make_result({}, {total});
  std::vector<int> tgt(targets.begin(), targets.end());
  return detail::maybe_record(
      "cross_entropy", {logits}, y,
      [logits, y, probs = std::move(probs), tgt = std::move(tgt), rows, cols] {
        double* gx = grad_of(logits);
        if (!gx) return;
        const double g = out_grad(y)[0];
        for (std::size_t r = 0; r < rows; ++r) {
          if (tgt[r] < 0) continue;
          for (std::size_t c = 0; c < cols; ++c) {
            const double onehot = static_cast<int>(c) == tgt[r] ? 1.0 : 0.0;
            gx[r * cols + c] += g * (probs[r * cols + c] - onehot);
          }
        }
      });
}

}  // namespace spinrect
