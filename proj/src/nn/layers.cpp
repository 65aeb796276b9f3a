// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>

#include "spinrect/nn.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/random.hpp"

namespace spinrect::nn {

Tensor ParamSet::add(const std::string& name, Shape shape) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate parameter '" + name + "'");
  Tensor t = Tensor::zeros(std::move(shape), true);
  entries_.emplace_back(name, t);
  return t;
}

Tensor ParamSet::add_buffer(const std::string& name, Shape shape) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate parameter '" + name + "'");
  Tensor t = Tensor::zeros(std::move(shape), false);
  entries_.emplace_back(name, t);
  return t;
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return true;
  }
  return false;
}

Tensor ParamSet::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw std::out_of_range("ParamSet: no parameter '" + name + "'");
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

ParamSet ParamSet::clone() const {
  ParamSet copy;
  for (const auto& [name, t] : entries_) {
    copy.entries_.emplace_back(name, Tensor::from(t.shape(), t.to_vector(), t.requires_grad()));
  }
  return copy;
}

void ParamSet::copy_values_from(const ParamSet& other) {
  if (other.size() != size()) throw std::invalid_argument("ParamSet: size mismatch on copy");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& [name, dst] = entries_[i];
    const auto& [oname, src] = other.entries_[i];
    if (name != oname || dst.shape() != src.shape()) {
      throw std::invalid_argument("ParamSet: layout mismatch at '" + name + "'");
    }
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
}

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void he_normal(Tensor& t, std::size_t fan_in, std::uint64_t seed, const std::string& name) {
  Rng rng(derive_seed(seed, name_hash(name)));
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.mutable_data()) v = sd * rng.normal();
}

void fill(Tensor& t, double value) {
  for (double& v : t.mutable_data()) v = value;
}

Conv3x3::Conv3x3(ParamSet& params, const std::string& n, std::size_t in, std::size_t out)
    : weight(params.add(n + ".weight", {out, in, 3, 3})),
      bias(params.add(n + ".bias", {out})),
      name(n) {}

Tensor Conv3x3::operator()(const Tensor& x) const { return conv2d(x, weight, bias); }

void Conv3x3::he_init(std::uint64_t seed) {
  he_normal(weight, weight.dim(1) * 9, seed, name + ".weight");
  fill(bias, 0.0);
}

BatchNorm::BatchNorm(ParamSet& params, const std::string& n, std::size_t channels)
    : gamma(params.add(n + ".gamma", {channels})),
      beta(params.add(n + ".beta", {channels})),
      running_mean(params.add_buffer(n + ".running_mean", {channels})),
      running_var(params.add_buffer(n + ".running_var", {channels})),
      name(n) {}

Tensor BatchNorm::operator()(const Tensor& x, bool training) const {
  const std::size_t ch = gamma.numel();
  if (training) {
    ChannelStats stats;
    Tensor y = batch_norm(x, gamma, beta, eps, &stats);
    // Running variance is tracked unbiased.
    const double count = static_cast<double>(x.numel() / ch);
    const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
    Tensor rm = running_mean, rv = running_var;
    auto m = rm.mutable_data();
    auto v = rv.mutable_data();
    for (std::size_t c = 0; c < ch; ++c) {
      m[c] = (1.0 - momentum) * m[c] + momentum * stats.mean[c];
      v[c] = (1.0 - momentum) * v[c] + momentum * stats.var[c] * unbias;
    }
    return y;
  }
  std::vector<double> inv(ch);
  for (std::size_t c = 0; c < ch; ++c) inv[c] = 1.0 / std::sqrt(running_var.at(c) + eps);
  const Tensor scale = mul(gamma, Tensor::from({ch}, std::move(inv)));
  const Tensor shift = sub(beta, mul(scale, running_mean));
  return channel_affine(x, scale, shift);
}

void BatchNorm::init() {
  fill(gamma, 1.0);
  fill(beta, 0.0);
  fill(running_mean, 0.0);
  fill(running_var, 1.0);
}

Linear::Linear(ParamSet& params, const std::string& n, std::size_t in, std::size_t out)
    : weight(params.add(n + ".weight", {in, out})),
      bias(params.add(n + ".bias", {out})),
      name(n) {}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t n = bias.numel();
  return add(x, expand(reshape(bias, {1, n}), {x.dim(0), n}));
}

Tensor Linear::operator()(const Tensor& x) const { return add_row_bias(matmul(x, weight), bias); }

void Linear::he_init(std::uint64_t seed) {
  he_normal(weight, weight.dim(0), seed, name + ".weight");
  fill(bias, 0.0);
}

LstmCell::LstmCell(ParamSet& params, const std::string& n, std::size_t in, std::size_t h)
    : w_input(params.add(n + ".w_input", {in, 4 * h})),
      w_hidden(params.add(n + ".w_hidden", {h, 4 * h})),
      bias(params.add(n + ".bias", {4 * h})),
      hidden(h),
      name(n) {}

LstmState LstmCell::operator()(const Tensor& x, const LstmState& state) const {
  const Tensor gates = add_row_bias(add(matmul(x, w_input), matmul(state.h, w_hidden)), bias);
  const std::size_t h = hidden;
  const Tensor in_gate = sigmoid(slice(gates, 1, 0, h));
  const Tensor forget_gate = sigmoid(slice(gates, 1, h, 2 * h));
  const Tensor candidate = tanh(slice(gates, 1, 2 * h, 3 * h));
  const Tensor out_gate = sigmoid(slice(gates, 1, 3 * h, 4 * h));
  Tensor c = add(mul(forget_gate, state.c), mul(in_gate, candidate));
  Tensor hn = mul(out_gate, tanh(c));
  return {hn, c};
}

LstmState LstmCell::zero_state(std::size_t batch) const {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

void LstmCell::init(std::uint64_t seed) {
  auto scaled = [&](Tensor& t, const std::string& tag) {
    Rng rng(derive_seed(seed, name_hash(name + tag)));
    const double sd = std::sqrt(1.0 / static_cast<double>(t.dim(0)));
    for (double& v : t.mutable_data()) v = sd * rng.normal();
  };
  scaled(w_input, ".w_input");
  scaled(w_hidden, ".w_hidden");
  auto b = bias.mutable_data();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = (i >= hidden && i < 2 * hidden) ? 1.0 : 0.0;
}

}  // namespace spinrect::nn
