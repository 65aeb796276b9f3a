// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/tps.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "spinrect/ops.hpp"

namespace spinrect::tps {

std::vector<double> FiducialSet::flat() const {
  std::vector<double> out(x);
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

FiducialSet canonical_fiducials(std::size_t n_coords, double inset) {
  if (n_coords % 4 != 0 || n_coords < 8) {
    throw std::invalid_argument("canonical_fiducials: need a multiple of 4 coordinates (>= 8), got " +
                                std::to_string(n_coords));
  }
  const std::size_t per_line = n_coords / 4;
  const double edge = 1.0 - 2.0 * inset;
  FiducialSet f;
  for (double y : {-edge, edge}) {
    for (std::size_t i = 0; i < per_line; ++i) {
      f.x.push_back(-edge + 2.0 * edge * static_cast<double>(i) /
                                static_cast<double>(per_line - 1));
      f.y.push_back(y);
    }
  }
  return f;
}

namespace {

double normalized(std::size_t i, std::size_t n) {
  return n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Radial basis U(r) = r^2 log r^2, with U(0) = 0.
double radial(double dx, double dy) {
  const double r2 = dx * dx + dy * dy;
  return r2 > 0.0 ? r2 * std::log(r2) : 0.0;
}

}  // namespace

SamplingGrid identity_grid(std::size_t batch, std::size_t h, std::size_t w) {
  std::vector<double> gx(batch * h * w), gy(batch * h * w);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        gx[(b * h + i) * w + j] = normalized(j, w);
        gy[(b * h + i) * w + j] = normalized(i, h);
      }
    }
  }
  return {Tensor::from({batch, h, w}, std::move(gx)), Tensor::from({batch, h, w}, std::move(gy))};
}

TpsKernel::TpsKernel(const FiducialSet& canonical, std::size_t out_h, std::size_t out_w)
    : points_(canonical.points()), out_h_(out_h), out_w_(out_w) {
  const std::size_t f = points_;
  const std::size_t n = f + 3;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      system(i, j) = radial(canonical.x[i] - canonical.x[j], canonical.y[i] - canonical.y[j]);
    }
    system(i, f) = system(f, i) = 1.0;
    system(i, f + 1) = system(f + 1, i) = canonical.x[i];
    system(i, f + 2) = system(f + 2, i) = canonical.y[i];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw std::domain_error("TpsKernel: canonical fiducial layout gives a singular system");
  }
  const Eigen::MatrixXd inverse = lu.inverse();

  // mapping(f, p) = sum_r a_p[r] * inverse(r, f): the weight of target
  // fiducial f in the source coordinate of output pixel p.
  const std::size_t pixels = out_h * out_w;
  std::vector<double> mapping(f * pixels);
  Eigen::VectorXd row(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const double px = normalized(j, out_w);
      const double py = normalized(i, out_h);
      for (std::size_t c = 0; c < f; ++c) row(c) = radial(px - canonical.x[c], py - canonical.y[c]);
      row(f) = 1.0;
      row(f + 1) = px;
      row(f + 2) = py;
      const Eigen::VectorXd weights = inverse.leftCols(static_cast<Eigen::Index>(f)).transpose() * row;
      for (std::size_t c = 0; c < f; ++c) mapping[c * pixels + i * out_w + j] = weights(c);
    }
  }
  mapping_ = Tensor::from({f, pixels}, std::move(mapping));
}

SamplingGrid TpsKernel::grid(const Tensor& fiducials) const {
  if (fiducials.rank() != 2 || fiducials.dim(1) != 2 * points_) {
    throw ShapeError("TpsKernel::grid: expected (batch, " + std::to_string(2 * points_) +
                     ") fiducials, got " + shape_str(fiducials.shape()));
  }
  const std::size_t batch = fiducials.dim(0);
  const Tensor fx = slice(fiducials, 1, 0, points_);
  const Tensor fy = slice(fiducials, 1, points_, 2 * points_);
  return {reshape(matmul(fx, mapping_), {batch, out_h_, out_w_}),
          reshape(matmul(fy, mapping_), {batch, out_h_, out_w_})};
}

}  // namespace spinrect::tps
