// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/tensor.hpp"

#include <sstream>

namespace spinrect {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ')';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(shape_numel(shape), value);
  return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("Tensor::from: shape " + shape_str(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.node_->is_leaf = false;
  return t;
}

detail::Node& Tensor::node() const {
  if (!node_) throw std::logic_error("use of an undefined Tensor");
  return *node_;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = node().shape;
  if (axis >= s.size()) {
    throw ShapeError("Tensor::dim: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(s));
  }
  return s[axis];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("Tensor::item: expected one element, shape is " + shape_str(shape()));
  }
  return node().data[0];
}

std::span<double> Tensor::mutable_data() {
  if (!node().is_leaf) throw std::logic_error("mutable_data() on a recorded result");
  return node().data;
}

void Tensor::set_requires_grad(bool value) {
  if (!node().is_leaf) throw std::logic_error("set_requires_grad() on a recorded result");
  node().requires_grad = value;
}

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw std::logic_error("grad() on a tensor without a gradient");
  return node().grad;
}

std::span<double> Tensor::mutable_grad() {
  node().ensure_grad();
  return node().grad;
}

void Tensor::zero_grad() {
  auto& g = node().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), node().data); }

}  // namespace spinrect
