// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/spin.hpp"

#include "spinrect/ops.hpp"
#include "spinrect/tps.hpp"

namespace spinrect::spin {

SpinConfig SpinConfig::paper(std::size_t k) {
  SpinConfig c;
  c.k = k;
  return c;
}

SpinConfig SpinConfig::toy(std::size_t k) {
  SpinConfig c;
  c.k = k;
  c.preset = Preset::toy;
  c.input_width = 50;
  c.input_height = 16;
  c.trunk_channels = {8, 16, 32};
  c.spn_channels = {64, 64, 128};
  c.ain_channels = {4, 1};
  c.linear_hidden = 64;
  return c;
}

Tensor pool2(const Tensor& x) {
  const std::size_t kh = x.dim(2) >= 2 ? 2 : 1;
  const std::size_t kw = x.dim(3) >= 2 ? 2 : 1;
  return maxpool2d(x, kh, kw, kh, kw);
}

Backbone::Backbone(const SpinConfig& config, nn::ParamSet& params, const std::string& prefix,
                   std::size_t head_width)
    : config_(config) {
  const auto& tc = config.trunk_channels;
  const auto& sc = config.spn_channels;
  trunk_[0] = nn::Conv3x3(params, prefix + ".block1", 1, tc[0]);
  trunk_[1] = nn::Conv3x3(params, prefix + ".block2", tc[0], tc[1]);
  trunk_[2] = nn::Conv3x3(params, prefix + ".block3", tc[1], tc[2]);
  block4_1_ = nn::Conv3x3(params, prefix + ".block4_1", tc[2], sc[0]);
  block5_1_ = nn::Conv3x3(params, prefix + ".block5_1", sc[0], sc[1]);
  block6_ = nn::Conv3x3(params, prefix + ".block6", sc[1], sc[2]);
  block7_ = nn::Linear(params, prefix + ".block7", sc[2], config.linear_hidden);
  block8_ = nn::Linear(params, prefix + ".block8", config.linear_hidden, head_width);
}

void Backbone::check_input(const Tensor& x) const {
  if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != config_.input_height ||
      x.dim(3) != config_.input_width) {
    throw ShapeError("rectifier: expected input (batch, 1, " +
                     std::to_string(config_.input_height) + ", " +
                     std::to_string(config_.input_width) + "), got " + shape_str(x.shape()));
  }
}

Tensor Backbone::trunk(const Tensor& x) const {
  check_input(x);
  Tensor h = x;
  for (const auto& conv : trunk_) h = pool2(relu(conv(h)));
  return h;
}

Tensor Backbone::head(const Tensor& features) const {
  Tensor h = pool2(relu(block4_1_(features)));
  h = pool2(relu(block5_1_(h)));
  h = global_avg_pool(relu(block6_(h)));
  h = relu(block7_(h));
  return block8_(h);
}

Backbone::Trace Backbone::trace(const Tensor& x) const {
  check_input(x);
  Trace t;
  Tensor h = x;
  const char* names[] = {"block1", "block2", "block3"};
  for (std::size_t i = 0; i < trunk_.size(); ++i) {
    h = pool2(relu(trunk_[i](h)));
    t.blocks.emplace_back(names[i], h);
  }
  t.features = h;
  h = pool2(relu(block4_1_(h)));
  t.blocks.emplace_back("block4_1", h);
  h = pool2(relu(block5_1_(h)));
  t.blocks.emplace_back("block5_1", h);
  h = relu(block6_(h));
  t.blocks.emplace_back("block6", h);
  h = relu(block7_(global_avg_pool(h)));
  t.blocks.emplace_back("block7", h);
  h = block8_(h);
  t.blocks.emplace_back("block8", h);
  t.head = h;
  return t;
}

void Backbone::init(std::uint64_t seed, const std::vector<double>& head_bias) {
  for (auto& conv : trunk_) conv.he_init(seed);
  block4_1_.he_init(seed);
  block5_1_.he_init(seed);
  block6_.he_init(seed);
  block7_.he_init(seed);
  block8_.he_init(seed);
  if (!head_bias.empty()) {
    if (head_bias.size() != block8_.out_features()) {
      throw ShapeError("Backbone::init: head bias of " + std::to_string(head_bias.size()) +
                       " values for a head of width " +
                       std::to_string(block8_.out_features()));
    }
    nn::fill(block8_.weight, 0.0);
    std::copy(head_bias.begin(), head_bias.end(), block8_.bias.mutable_data().begin());
  }
}

Tensor update_gate(const Tensor& gate_logit) { return sigmoid(gate_logit); }

Tensor gated_blend(const Tensor& x, const Tensor& offsets, const Tensor& alpha) {
  if (x.shape() != offsets.shape()) {
    throw ShapeError("gated_blend: image " + shape_str(x.shape()) + " vs offsets " +
                     shape_str(offsets.shape()));
  }
  const std::size_t batch = x.dim(0);
  if (alpha.numel() != batch) {
    throw ShapeError("gated_blend: expected one gate per image, got " + shape_str(alpha.shape()));
  }
  Shape per_image(x.rank(), 1);
  per_image[0] = batch;
  const Tensor a = expand(reshape(alpha, per_image), x.shape());
  return add(mul(add_scalar(scale(a, -1.0), 1.0), x), mul(a, offsets));
}

SpinHead split_head(const Tensor& head, std::size_t k, bool with_fiducials) {
  const std::size_t weights = 2 * k + 1;
  const std::size_t width = head.dim(1);
  if (width < weights + 1 || (!with_fiducials && width != weights + 1)) {
    throw ShapeError("split_head: head width " + std::to_string(width) + " for K=" +
                     std::to_string(k));
  }
  SpinHead out;
  out.omega = slice(head, 1, 0, weights);
  out.gate_logit = slice(head, 1, weights, weights + 1);
  if (with_fiducials) out.fiducials = slice(head, 1, weights + 1, width);
  return out;
}

SpinModule::SpinModule(const SpinConfig& config, nn::ParamSet& params, const std::string& prefix)
    : config_(config),
      bank_(spt::ExponentBank::build(config.k)),
      backbone_(config, params, prefix, config.head_width()) {
  block4_2_ = nn::Conv3x3(params, prefix + ".block4_2", config.trunk_channels[2],
                          config.ain_channels[0]);
  block5_2_ = nn::Conv3x3(params, prefix + ".block5_2", config.ain_channels[0],
                          config.ain_channels[1]);
}

SpinHead SpinModule::spn_head(const Tensor& features) const {
  return split_head(backbone_.head(features), config_.k, config_.ga_enabled);
}

OffsetMap SpinModule::ain_forward(const Tensor& features) const {
  OffsetMap m;
  const Tensor h = pool2(relu(block4_2_(features)));
  m.coarse = sigmoid(block5_2_(h));
  m.upsampled = resize_bilinear(m.coarse, config_.input_height, config_.input_width);
  return m;
}

SpinModule::Trace SpinModule::trace(const Tensor& x) const {
  Trace t;
  t.backbone = backbone_.trace(x);
  t.head = split_head(t.backbone.head, config_.k, config_.ga_enabled);
  Tensor source = x;
  if (config_.ain_enabled) {
    t.offsets = ain_forward(t.backbone.features);
    t.alpha = update_gate(t.head.gate_logit);
    t.blended = gated_blend(x, t.offsets.upsampled, t.alpha);
    source = t.blended;
  } else {
    t.blended = x;
  }
  t.output = spt::transform(source, t.head.omega, bank_);
  return t;
}

std::vector<double> SpinModule::init_head_bias() const {
  std::vector<double> bias(config_.head_width(), 0.0);
  bias[bank_.identity_index()] = 1.0;
  bias[2 * config_.k + 1] = -1.0;
  if (config_.ga_enabled) {
    const auto canonical = tps::canonical_fiducials(config_.n_fiducials).flat();
    std::copy(canonical.begin(), canonical.end(), bias.begin() + 2 * config_.k + 2);
  }
  return bias;
}

void SpinModule::init(InitScheme scheme, std::uint64_t seed) {
  backbone_.init(seed, scheme == InitScheme::paper_scheme ? init_head_bias()
                                                          : std::vector<double>{});
  block4_2_.he_init(seed);
  block5_2_.he_init(seed);
}

}  // namespace spinrect::spin
