// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/ops.hpp"
#include "spinrect/tps.hpp"

namespace spinrect::tps {

StnModule::StnModule(const spin::SpinConfig& config, nn::ParamSet& params,
                     const std::string& prefix)
    : config_(config),
      backbone_(config, params, prefix, config.n_fiducials),
      kernel_(canonical_fiducials(config.n_fiducials), config.input_height, config.input_width) {}

Tensor StnModule::fiducials(const Tensor& x) const { return backbone_.trace(x).head; }

Tensor StnModule::forward(const Tensor& x) const {
  return grid_sample(x, kernel_.grid(fiducials(x)));
}

void StnModule::init(std::uint64_t seed) {
  backbone_.init(seed, canonical_fiducials(config_.n_fiducials).flat());
}

namespace {
spin::SpinConfig with_geometry(spin::SpinConfig config) {
  config.ga_enabled = true;
  return config;
}
}  // namespace

GaSpin::GaSpin(const spin::SpinConfig& config, nn::ParamSet& params, const std::string& prefix,
               GaOrder order)
    : spin_(with_geometry(config), params, prefix),
      kernel_(canonical_fiducials(config.n_fiducials), config.input_height, config.input_width),
      order_(order) {}

GaSpin::Trace GaSpin::trace(const Tensor& x) const { return run(x, nullptr); }

GaSpin::Trace GaSpin::trace_with_fiducials(const Tensor& x, const Tensor& fiducials) const {
  return run(x, &fiducials);
}

GaSpin::Trace GaSpin::run(const Tensor& x, const Tensor* fiducial_override) const {
  const auto& cfg = spin_.config();
  Trace t;
  auto& c = t.chromatic;
  c.backbone = spin_.backbone().trace(x);
  c.head = spin::split_head(c.backbone.head, cfg.k, true);
  const Tensor fid = fiducial_override ? *fiducial_override : c.head.fiducials;
  t.grid = kernel_.grid(fid);
  if (cfg.ain_enabled) {
    c.offsets = spin_.ain_forward(c.backbone.features);
    c.alpha = spin::update_gate(c.head.gate_logit);
  }
  auto chromatic = [&](const Tensor& img) {
    c.blended = cfg.ain_enabled ? spin::gated_blend(img, c.offsets.upsampled, c.alpha) : img;
    c.output = spt::transform(c.blended, c.head.omega, spin_.bank());
    return c.output;
  };
  if (order_ == GaOrder::warp_first) {
    t.warped = grid_sample(x, t.grid);
    t.output = chromatic(t.warped);
  } else {
    t.output = grid_sample(chromatic(x), t.grid);
    t.warped = t.output;
  }
  return t;
}

}  // namespace spinrect::tps
