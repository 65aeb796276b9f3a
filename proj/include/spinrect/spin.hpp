// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Chromatic rectifier. A shared convolutional trunk feeds two branches:
// the structure-preserving branch regresses the power-function weights and
// an update-gate logit, and the auxiliary branch predicts a coarse sigmoid
// offset map. The input is blended with the upsampled offsets under the
// gate, then passed through the structure-preserving transform.
//
// Layer plan (paper preset, 100x32 input):
//
//   block1..3   conv 32/64/128 + 2x2 max-pool     -> 12x4
//   block4_1    conv 256 + pool                   -> 6x2   (weights branch)
//   block5_1    conv 256 + pool                   -> 3x1
//   block6      conv 512, then global average     -> 512
//   block7      linear 512 -> 256
//   block8      linear 256 -> 2K+2 (+N)
//   block4_2    conv 16 + 2x2 pool, stride 2      -> 6x2   (offset branch)
//   block5_2    conv 1 + sigmoid                  -> 6x2
//
// The toy preset halves the input and divides every channel count by four.
// A 2x2 pool over an axis of extent 1 pools only along the other axis.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spinrect/nn.hpp"
#include "spinrect/spt.hpp"
#include "spinrect/tensor.hpp"

namespace spinrect::spin {

enum class Preset { paper, toy };
enum class InitScheme { he_random, paper_scheme };

struct SpinConfig {
  std::size_t k = 6;
  std::size_t input_width = 100;
  std::size_t input_height = 32;
  Preset preset = Preset::paper;
  std::array<std::size_t, 3> trunk_channels{32, 64, 128};
  std::array<std::size_t, 3> spn_channels{256, 256, 512};
  std::array<std::size_t, 2> ain_channels{16, 1};
  std::size_t linear_hidden = 256;
  bool ain_enabled = true;
  bool ga_enabled = false;
  std::size_t n_fiducials = 40;

  static SpinConfig paper(std::size_t k = 6);
  static SpinConfig toy(std::size_t k = 6);

  /// Width of the last linear layer: 2K+1 weights, one gate logit, and N
  /// fiducial coordinates when geometry is absorbed.
  std::size_t head_width() const { return 2 * k + 2 + (ga_enabled ? n_fiducials : 0); }
};

/// 2x2 max-pool, stride 2; axes of extent 1 are left unpooled.
Tensor pool2(const Tensor& x);

/// Conv trunk plus the weights branch up to a linear head of arbitrary
/// width. Shared by the chromatic rectifier and the TPS localization net.
class Backbone {
 public:
  Backbone() = default;
  Backbone(const SpinConfig& config, nn::ParamSet& params, const std::string& prefix,
           std::size_t head_width);

  struct Trace {
    std::vector<std::pair<std::string, Tensor>> blocks;  // in execution order
    Tensor features;  // block3 output
    Tensor head;      // block8 output
  };

  Tensor trunk(const Tensor& x) const;
  /// Blocks 4-1 through 8 on trunk features.
  Tensor head(const Tensor& features) const;
  Trace trace(const Tensor& x) const;

  /// He-initializes every layer; the head's weights are zeroed and its
  /// bias set to `head_bias` when that is non-empty.
  void init(std::uint64_t seed, const std::vector<double>& head_bias);

  const nn::Linear& last_layer() const { return block8_; }

 private:
  void check_input(const Tensor& x) const;

  SpinConfig config_;
  std::array<nn::Conv3x3, 3> trunk_;
  nn::Conv3x3 block4_1_, block5_1_, block6_;
  nn::Linear block7_, block8_;
};

/// Per-image regressed parameters, split from the head output.
struct SpinHead {
  Tensor omega;       // (batch, 2K+1)
  Tensor gate_logit;  // (batch, 1)
  Tensor fiducials;   // (batch, N), undefined unless geometry is absorbed
};

struct OffsetMap {
  Tensor coarse;     // (batch, 1, h, w), sigmoid-activated
  Tensor upsampled;  // (batch, 1, input_height, input_width)
};

/// alpha = sigmoid(gate_logit), shape (batch, 1).
Tensor update_gate(const Tensor& gate_logit);

/// (1 - alpha) * x + alpha * offsets, with one alpha per image.
Tensor gated_blend(const Tensor& x, const Tensor& offsets, const Tensor& alpha);

/// Splits a head output into weights, gate logit and fiducials.
SpinHead split_head(const Tensor& head, std::size_t k, bool with_fiducials);

class SpinModule {
 public:
  SpinModule(const SpinConfig& config, nn::ParamSet& params, const std::string& prefix = "spin");

  struct Trace {
    Backbone::Trace backbone;
    SpinHead head;
    OffsetMap offsets;  // undefined tensors when the offset branch is disabled
    Tensor alpha;
    Tensor blended;
    Tensor output;
  };

  Tensor trunk_forward(const Tensor& x) const { return backbone_.trunk(x); }
  SpinHead spn_head(const Tensor& features) const;
  OffsetMap ain_forward(const Tensor& features) const;

  /// Full chromatic rectification of a (batch, 1, H, W) image in [0, 1].
  Tensor forward(const Tensor& x) const { return trace(x).output; }
  Trace trace(const Tensor& x) const;

  /// paper_scheme: He everywhere except the last linear layer, which gets
  /// zero weights and a bias of 1 at the exponent-1 slot, -1 at the gate
  /// slot, and the canonical fiducial layout when geometry is absorbed.
  void init(InitScheme scheme, std::uint64_t seed);

  /// Bias vector the paper scheme installs in the last layer.
  std::vector<double> init_head_bias() const;

  const SpinConfig& config() const { return config_; }
  const spt::ExponentBank& bank() const { return bank_; }
  const Backbone& backbone() const { return backbone_; }

 private:
  SpinConfig config_;
  spt::ExponentBank bank_;
  Backbone backbone_;
  nn::Conv3x3 block4_2_, block5_2_;
};

}  // namespace spinrect::spin
