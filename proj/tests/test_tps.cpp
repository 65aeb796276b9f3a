// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spinrect/gradsuite.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/tps.hpp"
#include "test_util.hpp"

using namespace spinrect;
using spinrect::testing::bit_equal;
using spinrect::testing::random_tensor;

namespace {

constexpr std::size_t kH = 16, kW = 48;

Tensor fiducial_tensor(const std::vector<double>& flat) { return Tensor::from({1, flat.size()}, flat); }

// Largest deviation of a grid from (ax * x + bx * y + cx, ay * x + by * y + cy)
// applied to the identity grid.
double affine_error(const tps::SamplingGrid& g, double ax, double bx, double cx, double ay, double by,
                    double cy) {
  const auto id = tps::identity_grid(1, g.x.dim(1), g.x.dim(2));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.x.numel(); ++i) {
    const double x = id.x.at(i), y = id.y.at(i);
    worst = std::max(worst, std::abs(g.x.at(i) - (ax * x + bx * y + cx)));
    worst = std::max(worst, std::abs(g.y.at(i) - (ay * x + by * y + cy)));
  }
  return worst;
}

tps::FiducialSet transformed(const tps::FiducialSet& f, double ax, double bx, double cx, double ay, double by,
                             double cy) {
  tps::FiducialSet out = f;
  for (std::size_t i = 0; i < f.points(); ++i) {
    out.x[i] = ax * f.x[i] + bx * f.y[i] + cx;
    out.y[i] = ay * f.x[i] + by * f.y[i] + cy;
  }
  return out;
}

double sigmoid_ref(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_CASE("canonical fiducials") {
  const auto f = tps::canonical_fiducials(40);
  REQUIRE(f.points() == 20);
  CHECK(f.flat().size() == 40);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(f.y[i] == doctest::Approx(-0.9));
    CHECK(f.y[10 + i] == doctest::Approx(0.9));
  }
  CHECK(f.x.front() == doctest::Approx(-0.9));
  CHECK(f.x[9] == doctest::Approx(0.9));
}

TEST_CASE("tps grid reproduces affine maps") {
  const auto canonical = tps::canonical_fiducials(40);
  const tps::TpsKernel kernel(canonical, kH, kW);
  SUBCASE("identity") {
    CHECK(affine_error(kernel.grid(fiducial_tensor(canonical.flat())), 1, 0, 0, 0, 1, 0) < 1e-6);
  }
  SUBCASE("shift") {
    const auto f = transformed(canonical, 1, 0, 0.1, 0, 1, 0);
    CHECK(affine_error(kernel.grid(fiducial_tensor(f.flat())), 1, 0, 0.1, 0, 1, 0) < 1e-6);
  }
  SUBCASE("scale") {
    const auto f = transformed(canonical, 0.5, 0, 0, 0, 0.5, 0);
    CHECK(affine_error(kernel.grid(fiducial_tensor(f.flat())), 0.5, 0, 0, 0, 0.5, 0) < 1e-6);
  }
  SUBCASE("rotation and shear") {
    const double c = std::cos(0.3), s = std::sin(0.3);
    const auto f = transformed(canonical, c, -s + 0.1, 0.05, s, c, -0.2);
    CHECK(affine_error(kernel.grid(fiducial_tensor(f.flat())), c, -s + 0.1, 0.05, s, c, -0.2) < 1e-6);
  }
}

TEST_CASE("tps grid interpolates non-affine fiducials") {
  const auto canonical = tps::canonical_fiducials(8);
  const std::size_t h = 11, w = 31;
  const tps::TpsKernel kernel(canonical, h, w);
  auto moved = canonical;
  moved.y[1] += 0.2;
  const auto g = kernel.grid(fiducial_tensor(moved.flat()));
  // The grid point nearest a fiducial moves with it; far corners barely move.
  CHECK(g.y.at(0) == doctest::Approx(-1.0).epsilon(0.05));
  double lifted = 0.0;
  for (std::size_t i = 0; i < g.y.numel(); ++i) {
    lifted = std::max(lifted, g.y.at(i) - tps::identity_grid(1, h, w).y.at(i));
  }
  CHECK(lifted > 0.1);
}

TEST_CASE("degenerate canonical layout is rejected") {
  tps::FiducialSet line;
  line.x = {-0.5, 0.0, 0.5, 0.9};
  line.y = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(tps::TpsKernel(line, 4, 8), std::domain_error);
}

TEST_CASE("grid_sample") {
  const Tensor x = random_tensor({2, 1, 5, 7}, 1, 0.0, 1.0);
  SUBCASE("identity grid is exact") {
    CHECK(bit_equal(tps::grid_sample(x, tps::identity_grid(2, 5, 7)), x));
  }
  SUBCASE("one-pixel shift") {
    auto g = tps::identity_grid(2, 5, 7);
    std::vector<double> gx = g.x.to_vector();
    for (double& v : gx) v += 2.0 / 6.0;  // one pixel right in normalized units
    const Tensor y = tps::grid_sample(x, {Tensor::from(g.x.shape(), gx), g.y});
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 7; ++c) {
          const double expect = c + 1 < 7 ? x.at((b * 5 + r) * 7 + c + 1) : 0.0;
          CHECK(y.at((b * 5 + r) * 7 + c) == doctest::Approx(expect).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("constant image under an in-range grid") {
    const Tensor k = Tensor::full({1, 1, 5, 7}, 0.3);
    const Tensor gx = random_tensor({1, 4, 9}, 2, -1.0, 1.0), gy = random_tensor({1, 4, 9}, 3, -1.0, 1.0);
    const Tensor y = tps::grid_sample(k, {gx, gy});
    CHECK(y.shape() == Shape{1, 1, 4, 9});
    for (double v : y.data()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
  }
  SUBCASE("outside the image is zero") {
    const Tensor y = tps::grid_sample(x, {Tensor::full({2, 1, 1}, 3.0), Tensor::full({2, 1, 1}, 0.0)});
    CHECK(y.to_vector() == std::vector<double>{0.0, 0.0});
  }
}

TEST_CASE("stn starts at the identity warp") {
  nn::ParamSet params;
  auto cfg = spin::SpinConfig::toy();
  cfg.input_width = kW;
  cfg.input_height = kH;
  tps::StnModule stn(cfg, params);
  stn.init(5);
  CHECK(params.get("stn.block8.bias").numel() == 40);
  const Tensor x = random_tensor({3, 1, kH, kW}, 6, 0.0, 1.0);
  CHECK(spinrect::testing::max_abs_diff(stn.forward(x), x) < 1e-12);
}

TEST_CASE("ga-spin at initialization") {
  nn::ParamSet params;
  auto cfg = spin::SpinConfig::toy();
  cfg.input_width = kW;
  cfg.input_height = kH;
  cfg.ga_enabled = true;
  tps::GaSpin ga(cfg, params);
  ga.init(spin::InitScheme::paper_scheme, 7);
  const Tensor x = random_tensor({2, 1, kH, kW}, 8, 0.0, 1.0);
  const auto t = ga.trace(x);
  CHECK(affine_error({slice(t.grid.x, 0, 0, 1), slice(t.grid.y, 0, 0, 1)}, 1, 0, 0, 0, 1, 0) < 1e-6);
  CHECK(affine_error({slice(t.grid.x, 0, 1, 2), slice(t.grid.y, 0, 1, 2)}, 1, 0, 0, 0, 1, 0) < 1e-6);
  const double alpha = sigmoid_ref(-1.0);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double g = (1 - alpha) * x.at(i) + alpha * t.chromatic.offsets.upsampled.at(i);
    CHECK(std::abs(t.output.at(i) - sigmoid_ref(g)) < 1e-12);
  }
}

TEST_CASE("ga-spin with canonical fiducials equals the chromatic rectifier") {
  nn::ParamSet params;
  auto cfg = spin::SpinConfig::toy();
  cfg.input_width = kW;
  cfg.input_height = kH;
  cfg.ga_enabled = true;
  tps::GaSpin ga(cfg, params);
  ga.init(spin::InitScheme::he_random, 9);
  const Tensor x = random_tensor({2, 1, kH, kW}, 10, 0.0, 1.0);
  const auto canonical = tps::canonical_fiducials(cfg.n_fiducials).flat();
  std::vector<double> both(canonical);
  both.insert(both.end(), canonical.begin(), canonical.end());
  const Tensor frozen = Tensor::from({2, canonical.size()}, both);
  const Tensor a = ga.trace_with_fiducials(x, frozen).output;
  const Tensor b = ga.spin().forward(x);
  CHECK(spinrect::testing::max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("ga-spin at chromatic init equals the warp followed by sigmoid of the blend") {
  nn::ParamSet params;
  auto cfg = spin::SpinConfig::toy();
  cfg.input_width = kW;
  cfg.input_height = kH;
  cfg.ga_enabled = true;
  tps::GaSpin ga(cfg, params);
  ga.init(spin::InitScheme::paper_scheme, 11);
  const Tensor x = random_tensor({1, 1, kH, kW}, 12, 0.0, 1.0);
  auto f = tps::canonical_fiducials(cfg.n_fiducials).flat();
  Rng rng(13);
  for (double& v : f) v += rng.uniform(-0.1, 0.1);
  const Tensor fid = fiducial_tensor(f);
  const auto t = ga.trace_with_fiducials(x, fid);
  const Tensor warped = tps::grid_sample(x, ga.kernel().grid(fid));
  const double alpha = sigmoid_ref(-1.0);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double g = (1 - alpha) * warped.at(i) + alpha * t.chromatic.offsets.upsampled.at(i);
    CHECK(std::abs(t.output.at(i) - sigmoid_ref(g)) < 1e-12);
  }
}

TEST_CASE("geometric gradient cases") {
  for (const char* filter : {"tps_grid", "grid_sample", "ga_spin_forward", "stn_forward"}) {
    const auto results = run_grad_suite(filter);
    REQUIRE_FALSE(results.empty());
    for (const auto& r : results) {
      CAPTURE(r.name);
      CHECK(r.report.passed);
    }
  }
}
