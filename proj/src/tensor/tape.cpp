// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/tensor.hpp"

namespace spinrect {
namespace {
thread_local Tape* g_current = nullptr;
}

Tape* Tape::current() { return g_current; }

TapeScope::TapeScope(Tape& tape) : previous_(g_current) { g_current = &tape; }
TapeScope::~TapeScope() { g_current = previous_; }

Tensor Tape::record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                    BackwardFn backward) {
  output.node().requires_grad = true;
  ops_.push_back(Op{std::string(name), std::move(inputs), output, std::move(backward)});
  return output;
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1 || !loss.shape().empty()) {
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw std::logic_error("backward: loss does not depend on any tensor requiring a gradient");
  }
  for (auto& op : ops_) {
    auto& out = op.output.node();
    out.grad.assign(out.data.size(), 0.0);
    for (auto& in : op.inputs) {
      if (in.requires_grad()) in.node().ensure_grad();
    }
  }
  loss.node().ensure_grad();
  loss.node().grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) it->backward();
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::current();
  if (!tape) throw std::logic_error("backward: no active tape on this thread");
  tape->backward(loss);
}

namespace detail {

bool needs_record(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::current()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor maybe_record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                    Tape::BackwardFn backward) {
  Tape* tape = Tape::current();
  if (!tape) return output;
  bool any = false;
  for (const auto& t : inputs) any = any || t.requires_grad();
  if (!any) return output;
  return tape->record(name, std::move(inputs), std::move(output), std::move(backward));
}

}  // namespace detail
}  // namespace spinrect
