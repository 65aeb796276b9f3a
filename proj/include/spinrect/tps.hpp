// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Thin-plate-spline sampling grids, the bilinear sampler, and the two
// rectifiers built on them: a standalone TPS localization network and the
// geometry-absorbing variant of the chromatic rectifier.
//
// Coordinates are normalized to [-1, 1] with align-corners convention:
// -1 is the centre of the first pixel and +1 the centre of the last.
// Fiducial vectors are laid out [x_0 .. x_{F-1}, y_0 .. y_{F-1}].

#pragma once

#include <cstdint>
#include <vector>

#include "spinrect/nn.hpp"
#include "spinrect/spin.hpp"
#include "spinrect/tensor.hpp"

namespace spinrect::tps {

struct FiducialSet {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t points() const { return x.size(); }
  /// The [x..., y...] vector form.
  std::vector<double> flat() const;
};

/// n_coords/2 points, half spaced evenly along the top margin and half
/// along the bottom, inset `inset` of the image extent from every edge.
FiducialSet canonical_fiducials(std::size_t n_coords, double inset = 0.05);

/// Source coordinate for every output pixel; both tensors (batch, h, w).
struct SamplingGrid {
  Tensor x;
  Tensor y;
};

SamplingGrid identity_grid(std::size_t batch, std::size_t h, std::size_t w);

/// Precomputed TPS solve for a fixed canonical layout and output size.
class TpsKernel {
 public:
  /// Throws std::domain_error if the canonical layout makes the TPS
  /// system singular.
  TpsKernel(const FiducialSet& canonical, std::size_t out_h, std::size_t out_w);

  /// Grid mapping canonical fiducials onto `fiducials` (batch, 2F).
  SamplingGrid grid(const Tensor& fiducials) const;

  std::size_t points() const { return points_; }
  std::size_t out_h() const { return out_h_; }
  std::size_t out_w() const { return out_w_; }

 private:
  std::size_t points_;
  std::size_t out_h_, out_w_;
  Tensor mapping_;  // (F, out_h * out_w), constant
};

/// Bilinear sampling with zero padding. Source coordinates within 1e-9
/// pixel of an integer snap to it, so an identity grid is exact.
Tensor grid_sample(const Tensor& image, const SamplingGrid& grid);

/// Standalone TPS rectifier: the rectifier backbone with an N-wide head.
class StnModule {
 public:
  StnModule(const spin::SpinConfig& config, nn::ParamSet& params,
            const std::string& prefix = "stn");

  Tensor fiducials(const Tensor& x) const;
  Tensor forward(const Tensor& x) const;
  /// He everywhere; last layer zero weights with the canonical layout as
  /// bias, so the initial warp is the identity.
  void init(std::uint64_t seed);

  const TpsKernel& kernel() const { return kernel_; }
  const spin::Backbone& backbone() const { return backbone_; }

 private:
  spin::SpinConfig config_;
  spin::Backbone backbone_;
  TpsKernel kernel_;
};

enum class GaOrder { warp_first, chromatic_first };

/// Chromatic rectifier with absorbed geometry: one backbone pass yields
/// weights, gate and fiducials.
class GaSpin {
 public:
  GaSpin(const spin::SpinConfig& config, nn::ParamSet& params, const std::string& prefix = "spin",
         GaOrder order = GaOrder::warp_first);

  struct Trace {
    spin::SpinModule::Trace chromatic;  // backbone, head, offsets, alpha, blend
    SamplingGrid grid;
    Tensor warped;
    Tensor output;
  };

  Tensor forward(const Tensor& x) const { return trace(x).output; }
  Trace trace(const Tensor& x) const;
  /// Same as trace() but with the predicted fiducials replaced.
  Trace trace_with_fiducials(const Tensor& x, const Tensor& fiducials) const;

  void init(spin::InitScheme scheme, std::uint64_t seed) { spin_.init(scheme, seed); }

  const spin::SpinModule& spin() const { return spin_; }
  const TpsKernel& kernel() const { return kernel_; }
  GaOrder order() const { return order_; }

 private:
  Trace run(const Tensor& x, const Tensor* fiducial_override) const;

  spin::SpinModule spin_;
  TpsKernel kernel_;
  GaOrder order_;
};

}  // namespace spinrect::tps
