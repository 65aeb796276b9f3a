// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>

#include "spinrect/harness.hpp"

namespace spinrect::harness {

double clip_grad_norm(nn::ParamSet& params, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : params.entries()) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& [name, p] : params.entries()) {
      if (!p.has_grad()) continue;
      Tensor t = p;
      for (double& g : t.mutable_grad()) g *= f;
    }
  }
  return norm;
}

AdaDelta::AdaDelta(const nn::ParamSet& params, double rho, double eps, double clip)
    : rho_(rho), eps_(eps), clip_(clip) {
  for (const auto& [name, p] : params.entries()) {
    names_.push_back(name);
    sq_.emplace_back(p.numel(), 0.0);
    acc_.emplace_back(p.numel(), 0.0);
  }
  scale_.assign(names_.size(), 1.0);
}

void AdaDelta::set_lr_scale(const std::string& name, double scale) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      scale_[i] = scale;
      return;
    }
  }
  throw std::invalid_argument("AdaDelta: no parameter named " + name);
}

void AdaDelta::step(nn::ParamSet& params, double lr) {
  const auto& entries = params.entries();
  if (entries.size() != names_.size()) throw std::logic_error("AdaDelta: parameter set changed");
  for (const auto& [name, p] : entries) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) {
      if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in parameter " + name);
    }
  }
  if (clip_ > 0.0) clip_grad_norm(params, clip_);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor p = entries[i].second;
    if (!p.has_grad()) continue;
    const auto grad = p.grad();
    auto value = p.mutable_data();
    auto& sq = sq_[i];
    auto& acc = acc_[i];
    const double rate = lr * scale_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      sq[j] = rho_ * sq[j] + (1.0 - rho_) * g * g;
      const double delta = std::sqrt(acc[j] + eps_) / std::sqrt(sq[j] + eps_) * g;
      acc[j] = rho_ * acc[j] + (1.0 - rho_) * delta * delta;
      value[j] -= rate * delta;
    }
  }
}

std::vector<std::pair<std::string, Tensor>> AdaDelta::state() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out.emplace_back("adadelta.sq." + names_[i], Tensor::from({sq_[i].size()}, sq_[i]));
    out.emplace_back("adadelta.acc." + names_[i], Tensor::from({acc_[i].size()}, acc_[i]));
  }
  return out;
}

void AdaDelta::load_state(const std::map<std::string, Tensor>& tensors) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto load = [&](const std::string& key, std::vector<double>& dst) {
      const auto it = tensors.find(key);
      if (it == tensors.end()) throw ShapeError("checkpoint lacks " + key);
      if (it->second.numel() != dst.size()) {
        throw ShapeError("checkpoint entry " + key + " has " + std::to_string(it->second.numel()) +
                         " values, expected " + std::to_string(dst.size()));
      }
      const auto d = it->second.data();
      dst.assign(d.begin(), d.end());
    };
    load("adadelta.sq." + names_[i], sq_[i]);
    load("adadelta.acc." + names_[i], acc_[i]);
  }
}

}  // namespace spinrect::harness
