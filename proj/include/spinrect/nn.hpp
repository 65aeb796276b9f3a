// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter storage and the small set of layers the models are built from.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spinrect/tensor.hpp"

namespace spinrect::nn {

/// Ordered, named collection of trainable leaves and non-trainable buffers.
class ParamSet {
 public:
  /// Registers a zero-filled parameter. Names must be unique.
  Tensor add(const std::string& name, Shape shape);
  /// Registers a zero-filled tensor that is saved with the parameters but
  /// never receives gradients.
  Tensor add_buffer(const std::string& name, Shape shape);

  bool contains(const std::string& name) const;
  Tensor get(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  void zero_grad();
  /// Deep copy with fresh leaves.
  ParamSet clone() const;
  /// Copies values from `other`, which must hold the same names and shapes.
  void copy_values_from(const ParamSet& other);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Stable 64-bit hash of a parameter name, used to derive per-tensor seeds.
std::uint64_t name_hash(const std::string& name);

/// Fills `t` with N(0, 2 / fan_in), seeded from (seed, name).
void he_normal(Tensor& t, std::size_t fan_in, std::uint64_t seed, const std::string& name);
void fill(Tensor& t, double value);

struct Conv3x3 {
  Tensor weight;  // (out, in, 3, 3)
  Tensor bias;    // (out)
  std::string name;

  Conv3x3() = default;
  Conv3x3(ParamSet& params, const std::string& name, std::size_t in, std::size_t out);
  Tensor operator()(const Tensor& x) const;
  void he_init(std::uint64_t seed);
};

struct Linear {
  Tensor weight;  // (in, out)
  Tensor bias;    // (out)
  std::string name;

  Linear() = default;
  Linear(ParamSet& params, const std::string& name, std::size_t in, std::size_t out);
  /// (batch, in) -> (batch, out)
  Tensor operator()(const Tensor& x) const;
  void he_init(std::uint64_t seed);
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

/// Batch normalization over (b,c,h,w). Training uses batch statistics and
/// moves the running estimates; inference uses the running estimates, so
/// each image is normalized independently of the rest of its batch.
struct BatchNorm {
  Tensor gamma;         // (c)
  Tensor beta;          // (c)
  Tensor running_mean;  // (c), buffer
  Tensor running_var;   // (c), buffer
  double eps = 1e-5;
  double momentum = 0.1;
  std::string name;

  BatchNorm() = default;
  BatchNorm(ParamSet& params, const std::string& name, std::size_t channels);
  Tensor operator()(const Tensor& x, bool training) const;
  /// gamma 1, beta 0, running mean 0, running variance 1.
  void init();
};

struct LstmState {
  Tensor h;  // (batch, hidden)
  Tensor c;  // (batch, hidden)
};

/// Standard LSTM cell with gate order (input, forget, cell, output).
struct LstmCell {
  Tensor w_input;   // (in, 4*hidden)
  Tensor w_hidden;  // (hidden, 4*hidden)
  Tensor bias;      // (4*hidden)
  std::size_t hidden = 0;
  std::string name;

  LstmCell() = default;
  LstmCell(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden);
  LstmState operator()(const Tensor& x, const LstmState& state) const;
  LstmState zero_state(std::size_t batch) const;
  /// N(0, 1/fan_in) weights, forget-gate bias 1.
  void init(std::uint64_t seed);
};

/// Adds a (n) vector to every row of a (batch, n) matrix.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

}  // namespace spinrect::nn
