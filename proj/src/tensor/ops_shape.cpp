// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "op_util.hpp"
#include "spinrect/ops.hpp"

namespace spinrect {
using detail::grad_of;
using detail::out_grad;

namespace {

// Splits a shape around `axis` into (outer, extent, inner) element counts.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) detail::shape_fail("concat", "no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) detail::shape_fail("concat", "axis out of range");
  Shape shape = first;
  shape[axis] = 0;
  for (const auto& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != first.size()) {
      detail::shape_fail("concat", "rank mismatch " + shape_str(first) + " vs " +
                                       shape_str(probe));
    }
    shape[axis] += probe[axis];
    probe[axis] = first[axis];
    if (probe != first) {
      detail::shape_fail("concat", "shape mismatch " + shape_str(first) + " vs " +
                                       shape_str(p.shape()));
    }
  }
  const AxisSplit total = split_at(shape, axis);
  std::vector<double> out(shape_numel(shape));
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    const AxisSplit s = split_at(p.shape(), axis);
    const std::size_t run = s.extent * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(p.data().data() + o * run, run,
                  out.data() + o * total.extent * total.inner + offset * total.inner);
    }
    offsets.push_back(offset);
    offset += s.extent;
  }
  Tensor y = Tensor::make_result(shape, std::move(out));
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return detail::maybe_record("concat", inputs, y, [inputs, y, axis, offsets, total] {
    const double* gy = out_grad(y);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      double* gp = grad_of(inputs[i]);
      if (!gp) continue;
      const AxisSplit s = split_at(inputs[i].shape(), axis);
      const std::size_t run = s.extent * s.inner;
      for (std::size_t o = 0; o < s.outer; ++o) {
        const double* src = gy + o * total.extent * total.inner + offsets[i] * total.inner;
        for (std::size_t j = 0; j < run; ++j) gp[o * run + j] += src[j];
      }
    }
  });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= x.rank() || begin > end || end > x.dim(axis)) {
    detail::shape_fail("slice", "range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                    ") on axis " + std::to_string(axis) + " of " +
                                    shape_str(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = end - begin;
  const std::size_t run = (end - begin) * s.inner;
  std::vector<double> out(s.outer * run);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(x.data().data() + (o * s.extent + begin) * s.inner, run, out.data() + o * run);
  }
  Tensor y = Tensor::make_result(std::move(shape), std::move(out));
  return detail::maybe_record("slice", {x}, y, [x, y, s, begin, run] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = gx + (o * s.extent + begin) * s.inner;
      for (std::size_t j = 0; j < run; ++j) dst[j] += gy[o * run + j];
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    detail::shape_fail("reshape", "cannot view " + shape_str(x.shape()) + " as " +
                                      shape_str(shape));
  }
  Tensor y = Tensor::make_result(std::move(shape), x.to_vector());
  return detail::maybe_record("reshape", {x}, y, [x, y] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    for (std::size_t i = 0; i < x.numel(); ++i) gx[i] += gy[i];
  });
}

Tensor expand(const Tensor& x, Shape shape) {
  const Shape& from = x.shape();
  if (from.size() != shape.size()) {
    detail::shape_fail("expand", "rank mismatch " + shape_str(from) + " -> " + shape_str(shape));
  }
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] != shape[i] && from[i] != 1) {
      detail::shape_fail("expand", "cannot broadcast " + shape_str(from) + " to " +
                                       shape_str(shape));
    }
  }
  // Source strides, zero along broadcast axes.
  const std::size_t rank = shape.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t acc = 1;
  for (std::size_t i = rank; i-- > 0;) {
    stride[i] = from[i] == 1 ? 0 : acc;
    acc *= from[i];
  }
  const std::size_t n = shape_numel(shape);
  std::vector<std::size_t> src_index(n);
  std::vector<std::size_t> counter(rank, 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < rank; ++i) s += counter[i] * stride[i];
    src_index[flat] = s;
    for (std::size_t i = rank; i-- > 0;) {
      if (++counter[i] < shape[i]) break;
      counter[i] = 0;
    }
  }
  std::vector<double> out(n);
  const auto in = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = in[src_index[i]];
  Tensor y = Tensor::make_result(std::move(shape), std::move(out));
  return detail::maybe_record("expand", {x}, y, [x, y, src_index = std::move(src_index)] {
    double* gx = grad_of(x);
    if (!gx) return;
    const double* gy = out_grad(y);
    for (std::size_t i = 0; i < src_index.size(); ++i) gx[src_index[i]] += gy[i];
  });
}

}  // namespace spinrect
