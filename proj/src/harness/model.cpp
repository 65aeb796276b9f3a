// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <stdexcept>

#include "spinrect/harness.hpp"
#include "spinrect/random.hpp"

namespace spinrect::harness {
namespace {

constexpr std::array<std::pair<Mode, std::string_view>, 6> kModes = {{
    {Mode::none, "none"},
    {Mode::spin_no_ain, "spin-no-ain"},
    {Mode::spin, "spin"},
    {Mode::stn, "stn"},
    {Mode::spin_stn, "spin+stn"},
    {Mode::ga_spin, "ga-spin"},
}};

}  // namespace

std::string_view name(Mode mode) {
  for (const auto& [m, n] : kModes) {
    if (m == mode) return n;
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  for (const auto& [m, n] : kModes) {
    if (n == s) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(s) +
                              "' (expected none, spin-no-ain, spin, stn, spin+stn or ga-spin)");
}

spin::Preset parse_preset(std::string_view s) {
  if (s == "toy") return spin::Preset::toy;
  if (s == "paper") return spin::Preset::paper;
  throw std::invalid_argument("unknown preset '" + std::string(s) + "' (expected toy or paper)");
}

std::string_view name(spin::Preset preset) { return preset == spin::Preset::toy ? "toy" : "paper"; }

spin::InitScheme parse_init(std::string_view s) {
  if (s == "paper") return spin::InitScheme::paper_scheme;
  if (s == "he_random") return spin::InitScheme::he_random;
  throw std::invalid_argument("unknown init '" + std::string(s) + "' (expected paper or he_random)");
}

std::string_view name(spin::InitScheme scheme) {
  return scheme == spin::InitScheme::paper_scheme ? "paper" : "he_random";
}

spin::SpinConfig rectifier_config(spin::Preset preset, std::size_t k) {
  if (preset == spin::Preset::paper) return spin::SpinConfig::paper(k);
  spin::SpinConfig c = spin::SpinConfig::toy(k);
  const rec::RecognizerConfig r = recognizer_config(preset);
  c.input_width = r.input_width;
  c.input_height = r.input_height;
  return c;
}

rec::RecognizerConfig recognizer_config(spin::Preset preset) {
  return preset == spin::Preset::paper ? rec::RecognizerConfig::paper_shaped()
                                       : rec::RecognizerConfig::toy();
}

Pipeline::Pipeline(Mode mode, std::size_t k, spin::Preset preset) : mode_(mode) {
  spin::SpinConfig sc = rectifier_config(preset, k);
  width_ = sc.input_width;
  height_ = sc.input_height;
  switch (mode) {
    case Mode::none:
      break;
    case Mode::spin_no_ain:
      sc.ain_enabled = false;
      spin_ = std::make_unique<spin::SpinModule>(sc, params_, "spin");
      break;
    case Mode::spin:
      spin_ = std::make_unique<spin::SpinModule>(sc, params_, "spin");
      break;
    case Mode::stn:
      stn_ = std::make_unique<tps::StnModule>(sc, params_, "stn");
      break;
    case Mode::spin_stn:
      spin_ = std::make_unique<spin::SpinModule>(sc, params_, "spin");
      stn_ = std::make_unique<tps::StnModule>(sc, params_, "stn");
      break;
    case Mode::ga_spin:
      ga_ = std::make_unique<tps::GaSpin>(sc, params_, "spin");
      break;
  }
  rec_ = std::make_unique<rec::Recognizer>(recognizer_config(preset), params_, "rec");
}

Tensor Pipeline::rectify(const Tensor& x) const {
  if (ga_) return ga_->forward(x);
  Tensor y = x;
  if (spin_) y = spin_->forward(y);
  if (stn_) y = stn_->forward(y);
  return y;
}

Tensor Pipeline::loss(const Tensor& x, const std::vector<std::string>& labels) const {
  return rec_->loss(rectify(x), labels);
}

std::vector<std::string> Pipeline::recognize(const Tensor& x) const {
  return rec_->recognize(rectify(x));
}

void Pipeline::init(spin::InitScheme scheme, std::uint64_t seed) {
  if (spin_) spin_->init(scheme, derive_seed(seed, 1));
  if (stn_) stn_->init(derive_seed(seed, 2));
  if (ga_) ga_->init(scheme, derive_seed(seed, 1));
  rec_->init(derive_seed(seed, 3));
}

std::vector<std::pair<std::string, Tensor>> Pipeline::intermediates(const Tensor& x) const {
  std::vector<std::pair<std::string, Tensor>> out;
  if (ga_) {
    const auto t = ga_->trace(x);
    if (t.chromatic.offsets.upsampled.defined()) out.emplace_back("offsets", t.chromatic.offsets.upsampled);
    out.emplace_back("blended", t.chromatic.blended);
    out.emplace_back("warped", t.warped);
    out.emplace_back("output", t.output);
    return out;
  }
  Tensor y = x;
  if (spin_) {
    const auto t = spin_->trace(y);
    if (t.offsets.upsampled.defined()) out.emplace_back("offsets", t.offsets.upsampled);
    out.emplace_back("blended", t.blended);
    out.emplace_back("spin", t.output);
    y = t.output;
  }
  if (stn_) {
    y = stn_->forward(y);
    out.emplace_back("stn", y);
  }
  out.emplace_back("output", y);
  return out;
}

}  // namespace spinrect::harness
