// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "spinrect/gradsuite.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/spin.hpp"
#include "test_util.hpp"

using namespace spinrect;
using spinrect::testing::bit_equal;
using spinrect::testing::random_tensor;

namespace {

double sigmoid_ref(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Tensor image(const spin::SpinConfig& c, std::size_t batch, std::uint64_t seed) {
  return random_tensor({batch, 1, c.input_height, c.input_width}, seed, 0.0, 1.0);
}

std::map<std::string, Shape> block_shapes(const spin::Backbone::Trace& t) {
  std::map<std::string, Shape> out;
  for (const auto& [name, value] : t.blocks) out[name] = value.shape();
  return out;
}

}  // namespace

TEST_CASE("trunk output shapes") {
  SUBCASE("paper preset") {
    nn::ParamSet params;
    const auto cfg = spin::SpinConfig::paper();
    spin::SpinModule m(cfg, params);
    m.init(spin::InitScheme::he_random, 1);
    CHECK(m.trunk_forward(image(cfg, 2, 1)).shape() == Shape{2, 128, 4, 12});
  }
  SUBCASE("toy preset") {
    nn::ParamSet params;
    const auto cfg = spin::SpinConfig::toy();
    spin::SpinModule m(cfg, params);
    m.init(spin::InitScheme::he_random, 1);
    CHECK(cfg.input_width == 50);
    CHECK(m.trunk_forward(image(cfg, 3, 1)).shape() == Shape{3, 32, 2, 6});
  }
}

TEST_CASE("paper preset block outputs") {
  for (std::size_t k : {0u, 6u, 9u}) {
    nn::ParamSet params;
    const auto cfg = spin::SpinConfig::paper(k);
    spin::SpinModule m(cfg, params);
    m.init(spin::InitScheme::paper_scheme, 2);
    const auto t = m.trace(image(cfg, 1, 2));
    const auto s = block_shapes(t.backbone);
    CHECK(s.at("block1") == Shape{1, 32, 16, 50});
    CHECK(s.at("block2") == Shape{1, 64, 8, 25});
    CHECK(s.at("block3") == Shape{1, 128, 4, 12});
    CHECK(s.at("block4_1") == Shape{1, 256, 2, 6});
    CHECK(s.at("block5_1") == Shape{1, 256, 1, 3});
    CHECK(s.at("block6") == Shape{1, 512, 1, 3});
    CHECK(s.at("block7") == Shape{1, 256});
    CHECK(s.at("block8") == Shape{1, 2 * k + 2});
    CHECK(t.offsets.coarse.shape() == Shape{1, 1, 2, 6});
    CHECK(t.offsets.upsampled.shape() == Shape{1, 1, 32, 100});
    CHECK(t.output.shape() == Shape{1, 1, 32, 100});
  }
}

TEST_CASE("input size is checked") {
  nn::ParamSet params;
  spin::SpinModule m(spin::SpinConfig::toy(), params);
  m.init(spin::InitScheme::he_random, 1);
  CHECK_THROWS_AS(m.forward(Tensor::zeros({1, 1, 16, 48})), ShapeError);
  CHECK_THROWS_AS(m.forward(Tensor::zeros({1, 2, 16, 50})), ShapeError);
}

TEST_CASE("zero image gives a deterministic bias-driven feature map") {
  nn::ParamSet params;
  const auto cfg = spin::SpinConfig::toy();
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::he_random, 3);
  const Tensor zero = Tensor::zeros({2, 1, cfg.input_height, cfg.input_width});
  const Tensor a = m.trunk_forward(zero), b = m.trunk_forward(zero);
  CHECK(bit_equal(a, b));
  const std::size_t per = a.numel() / 2;
  for (std::size_t i = 0; i < per; ++i) CHECK(a.at(i) == a.at(per + i));
}

TEST_CASE("pool2 leaves unit axes alone") {
  CHECK(spin::pool2(Tensor::zeros({1, 2, 4, 6})).shape() == Shape{1, 2, 2, 3});
  CHECK(spin::pool2(Tensor::zeros({1, 2, 1, 6})).shape() == Shape{1, 2, 1, 3});
  CHECK(spin::pool2(Tensor::zeros({1, 2, 4, 1})).shape() == Shape{1, 2, 2, 1});
}

TEST_CASE("head widths") {
  CHECK(spin::SpinConfig::paper(6).head_width() == 14);
  auto ga = spin::SpinConfig::paper(6);
  ga.ga_enabled = true;
  CHECK(ga.n_fiducials == 40);
  CHECK(ga.head_width() == 54);
  nn::ParamSet params;
  spin::SpinModule m(ga, params);
  CHECK(params.get("spin.block8.bias").shape() == Shape{54});
  CHECK_THROWS_AS(spin::split_head(Tensor::zeros({1, 13}), 6, false), ShapeError);
}

TEST_CASE("paper initialization") {
  const std::size_t k = 6;
  nn::ParamSet params;
  const auto cfg = spin::SpinConfig::toy(k);
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::paper_scheme, 4);
  const auto bias = m.init_head_bias();
  std::size_t nonzero = 0;
  for (double b : bias) nonzero += b != 0.0;
  CHECK(nonzero == 2);
  CHECK(bias[k] == 1.0);
  CHECK(bias[2 * k + 1] == -1.0);

  const Tensor x = image(cfg, 3, 5);
  const auto t = m.trace(x);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t i = 0; i < 2 * k + 1; ++i) CHECK(t.head.omega.at(b * (2 * k + 1) + i) == (i == k ? 1.0 : 0.0));
    CHECK(t.head.gate_logit.at(b) == -1.0);
  }
  // Output is sigmoid of the gated blend, alpha = sigmoid(-1).
  const double alpha = sigmoid_ref(-1.0);
  CHECK(alpha == doctest::Approx(0.2689).epsilon(1e-4));
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double g = (1.0 - alpha) * x.at(i) + alpha * t.offsets.upsampled.at(i);
    CHECK(std::abs(t.output.at(i) - sigmoid_ref(g)) < 1e-12);
  }
}

TEST_CASE("AIN disabled at initialization is sigmoid(x)") {
  nn::ParamSet params;
  auto cfg = spin::SpinConfig::toy();
  cfg.ain_enabled = false;
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::paper_scheme, 6);
  const Tensor x = image(cfg, 2, 7);
  const Tensor y = m.forward(x);
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::abs(y.at(i) - sigmoid_ref(x.at(i))) < 1e-15);
  // The gate slot stays in the layout.
  CHECK(params.get("spin.block8.bias").numel() == 2 * cfg.k + 2);
}

TEST_CASE("he_random is reproducible per seed") {
  auto bytes = [](std::uint64_t seed) {
    nn::ParamSet params;
    spin::SpinModule m(spin::SpinConfig::toy(), params);
    m.init(spin::InitScheme::he_random, seed);
    std::vector<double> all;
    for (const auto& [name, t] : params.entries()) all.insert(all.end(), t.data().begin(), t.data().end());
    return all;
  };
  CHECK(bytes(9) == bytes(9));
  CHECK(bytes(9) != bytes(10));
}

TEST_CASE("offset map") {
  nn::ParamSet params;
  const auto cfg = spin::SpinConfig::toy();
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::he_random, 11);
  const Tensor features = m.trunk_forward(image(cfg, 2, 12));

  SUBCASE("corners of the upsampled map are the coarse corners") {
    const auto off = m.ain_forward(features);
    const std::size_t h = off.coarse.dim(2), w = off.coarse.dim(3);
    const std::size_t H = cfg.input_height, W = cfg.input_width;
    for (std::size_t b = 0; b < 2; ++b) {
      const std::size_t cb = b * h * w, ub = b * H * W;
      CHECK(off.upsampled.at(ub) == off.coarse.at(cb));
      CHECK(off.upsampled.at(ub + W - 1) == off.coarse.at(cb + w - 1));
      CHECK(off.upsampled.at(ub + (H - 1) * W) == off.coarse.at(cb + (h - 1) * w));
      CHECK(off.upsampled.at(ub + H * W - 1) == off.coarse.at(cb + h * w - 1));
    }
  }
  SUBCASE("zero convolutions give a constant 0.5 map") {
    for (const auto& [name, t] : params.entries()) {
      if (name.find("block4_2") != std::string::npos || name.find("block5_2") != std::string::npos) {
        Tensor p = t;
        nn::fill(p, 0.0);
      }
    }
    const auto off = m.ain_forward(features);
    CHECK(off.upsampled.to_vector() == std::vector<double>(off.upsampled.numel(), 0.5));
  }
  SUBCASE("constant coarse map upsamples to the same constant") {
    const Tensor up = resize_bilinear(Tensor::full({1, 1, 2, 6}, 0.37), 16, 50);
    for (double v : up.data()) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
  }
}

TEST_CASE("gated blend") {
  const Tensor x = random_tensor({2, 1, 3, 4}, 13, 0.0, 1.0);
  const Tensor off = random_tensor({2, 1, 3, 4}, 14, 0.0, 1.0);
  CHECK(bit_equal(spin::gated_blend(x, off, spin::update_gate(Tensor::full({2, 1}, -800.0))), x));
  CHECK(bit_equal(spin::gated_blend(x, off, spin::update_gate(Tensor::full({2, 1}, 800.0))), off));
  const Tensor half = Tensor::full({1, 1, 2, 2}, 0.5);
  const Tensor mixed = spin::gated_blend(half, half, spin::update_gate(Tensor::full({1, 1}, -1.0)));
  for (double v : mixed.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(spin::gated_blend(x, Tensor::zeros({2, 1, 3, 3}), Tensor::zeros({2, 1})), ShapeError);
  CHECK_THROWS_AS(spin::gated_blend(x, off, Tensor::zeros({3, 1})), ShapeError);
}

TEST_CASE("outputs stay inside (0, 1) for arbitrary weights") {
  nn::ParamSet params;
  const auto cfg = spin::SpinConfig::toy();
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::he_random, 15);
  Tensor b8 = params.get("spin.block8.weight");
  Rng rng(16);
  for (double& v : b8.mutable_data()) v = rng.uniform(-3.0, 3.0);
  const Tensor y = m.forward(image(cfg, 4, 17));
  for (double v : y.data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("structure preservation with AIN disabled") {
  auto cfg = spin::SpinConfig::toy();
  cfg.ain_enabled = false;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    nn::ParamSet params;
    spin::SpinModule m(cfg, params);
    m.init(spin::InitScheme::he_random, seed);
    Rng rng(seed + 100);
    std::vector<double> levels(6), pixels(cfg.input_height * cfg.input_width);
    for (double& l : levels) l = rng.uniform();
    for (double& p : pixels) p = levels[rng.index(levels.size())];
    const Tensor y = m.forward(Tensor::from({1, 1, cfg.input_height, cfg.input_width}, pixels));
    std::map<double, double> seen;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      auto [it, fresh] = seen.emplace(pixels[i], y.at(i));
      if (!fresh) CHECK(it->second == y.at(i));
    }
  }
}

TEST_CASE("single-pixel response is monotone and continuous at initialization") {
  nn::ParamSet params;
  const auto cfg = spin::SpinConfig::toy();
  spin::SpinModule m(cfg, params);
  m.init(spin::InitScheme::paper_scheme, 18);
  const Tensor base = image(cfg, 1, 19);
  const std::size_t pixel = 7 * cfg.input_width + 20;
  double previous = -1.0;
  for (int step = 0; step <= 64; ++step) {
    auto v = base.to_vector();
    v[pixel] = step / 64.0;
    const double y = m.forward(Tensor::from(base.shape(), v)).at(pixel);
    if (previous >= 0.0) {
      CHECK(y >= previous);
      CHECK(y - previous < 0.01);
    }
    previous = y;
  }
}

TEST_CASE("rectifier gradient cases") {
  for (const char* filter : {"spt_transform", "gated_blend", "ain_forward", "spin_forward"}) {
    const auto results = run_grad_suite(filter);
    REQUIRE_FALSE(results.empty());
    for (const auto& r : results) {
      CAPTURE(r.name);
      CHECK(r.report.passed);
      CHECK(r.report.max_rel_error < r.tolerance);
    }
  }
}
