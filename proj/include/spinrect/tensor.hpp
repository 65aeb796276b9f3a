// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over dense row-major double arrays.
//
// A Tensor is a shared handle to an immutable value plus an optional
// gradient buffer. Operations record themselves on the calling thread's
// active Tape (see TapeScope) whenever one of their inputs requires a
// gradient; backward() replays the recorded vector-Jacobian products in
// reverse order.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spinrect {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Shape or argument mismatch detected by an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool is_leaf = true;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node().shape; }
  std::size_t rank() const { return node().shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node().data.size(); }

  std::span<const double> data() const { return node().data; }
  double item() const;
  double at(std::size_t flat_index) const { return node().data.at(flat_index); }
  std::vector<double> to_vector() const { return node().data; }

  /// Writable view of a leaf's values (parameters, optimizer updates).
  /// Throws for tensors produced by a recorded operation.
  std::span<double> mutable_data();

  bool requires_grad() const { return node().requires_grad; }
  void set_requires_grad(bool value);
  bool is_leaf() const { return node().is_leaf; }

  bool has_grad() const { return node().grad.size() == node().data.size(); }
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Fresh leaf holding a copy of this tensor's values.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  // For operation implementations.
  static Tensor make_result(Shape shape, std::vector<double> values);
  detail::Node& node() const;

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Ordered record of differentiable operations.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Op {
    std::string name;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records `output = name(inputs)` if any input requires a gradient and
  /// marks the output accordingly. Returns output for chaining.
  Tensor record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and replays every recorded rule in reverse.
  /// Gradients of intermediate results are reset first; leaf gradients
  /// accumulate across calls.
  void backward(const Tensor& loss);

  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }
  const std::vector<Op>& ops() const { return ops_; }

  /// Tape receiving operations on this thread, or nullptr.
  static Tape* current();

 private:
  friend class TapeScope;
  std::vector<Op> ops_;
};

/// Makes a tape current on this thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Runs backward on the current thread's tape.
void backward(const Tensor& loss);

namespace detail {
/// True if an op over these inputs must be recorded.
bool needs_record(std::initializer_list<const Tensor*> inputs);
/// Records on the current tape when needed; otherwise returns output as is.
Tensor maybe_record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                    Tape::BackwardFn backward);
}  // namespace detail

}  // namespace spinrect
