// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "spinrect/gradcheck.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/spt.hpp"
#include "test_util.hpp"

using namespace spinrect;
using spinrect::testing::random_tensor;
using spinrect::testing::weighted_sum;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

// Hundredths, rounded half away from zero in 50-digit arithmetic.
long hundredths(const Big& v) {
  const Big scaled = v * 100;
  const Big r = scaled >= 0 ? boost::multiprecision::floor(scaled + Big("0.5"))
                            : boost::multiprecision::ceil(scaled - Big("0.5"));
  return r.convert_to<long>();
}

std::vector<long> oracle_bank(std::size_t k) {
  std::vector<long> out(2 * k + 1);
  const Big denom = Big(2) * Big(k + 1);
  for (std::size_t i = 1; i <= k + 1; ++i) {
    const Big t = Big(i) / denom;
    out[i - 1] = hundredths(boost::multiprecision::log(1 - t) / boost::multiprecision::log(t));
  }
  for (std::size_t i = k + 2; i <= 2 * k + 1; ++i) {
    out[i - 1] = hundredths(Big(100) / Big(out[i - 2 - k]));
  }
  return out;
}

double sigmoid_ref(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_CASE("exponent bank matches a 50-digit evaluation for K up to 12") {
  for (std::size_t k = 0; k <= 12; ++k) {
    CAPTURE(k);
    const auto bank = spt::ExponentBank::build(k);
    const auto expect = oracle_bank(k);
    REQUIRE(bank.size() == 2 * k + 1);
    for (std::size_t i = 0; i < bank.size(); ++i) {
      CAPTURE(i);
      CHECK(bank[i] == static_cast<double>(expect[i]) / 100.0);
    }
  }
}

TEST_CASE("exponent bank invariants") {
  for (std::size_t k = 0; k <= 12; ++k) {
    const auto bank = spt::ExponentBank::build(k);
    CHECK(bank[k] == 1.0);
    CHECK(bank.identity_index() == k);
    for (double b : bank.betas()) CHECK(b > 0.0);
    for (std::size_t i = 1; i <= k; ++i) {
      CHECK(bank[i - 1] < 1.0);
      CHECK(bank[k + i] == spt::round2(1.0 / bank[i - 1]));
    }
    CHECK(bank == spt::ExponentBank::build(k));
  }
}

TEST_CASE("exponent bank examples") {
  CHECK(spt::ExponentBank::build(0).betas() == std::vector<double>{1.0});
  CHECK(spt::ExponentBank::build(1).betas() == std::vector<double>{0.21, 1.0, 4.76});
  const auto six = spt::ExponentBank::build(6);
  CHECK(six[1] == 0.08);
  CHECK(six[8] == 12.5);
  // Same 13 values as the documented K=6 listing.
  auto sorted = six.betas();
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<double>{0.03, 0.08, 0.16, 0.27, 0.43, 0.66, 1.00, 1.52, 2.33, 3.70,
                                      6.25, 12.50, 33.33});
}

TEST_CASE("round2 rounds halves away from zero") {
  CHECK(spt::round2(0.125) == 0.13);
  CHECK(spt::round2(-0.125) == -0.13);
  CHECK(spt::round2(4.7619) == 4.76);
}

TEST_CASE("transform examples") {
  const auto bank = spt::ExponentBank::build(6);
  const Tensor x = random_tensor({2, 1, 3, 4}, 1, 0.0, 1.0);
  SUBCASE("one-hot at the identity exponent gives sigmoid(x)") {
    std::vector<double> w(2 * bank.size(), 0.0);
    w[bank.identity_index()] = 1.0;
    w[bank.size() + bank.identity_index()] = 1.0;
    const Tensor y = spt::transform(x, Tensor::from({2, bank.size()}, w), bank);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.at(i) == doctest::Approx(sigmoid_ref(x.at(i))).epsilon(1e-15));
  }
  SUBCASE("zero weights give 0.5 everywhere") {
    const Tensor y = spt::transform(x, Tensor::zeros({2, bank.size()}), bank);
    CHECK(y.to_vector() == std::vector<double>(x.numel(), 0.5));
  }
  SUBCASE("K=1 scalar evaluation") {
    const auto one = spt::ExponentBank::build(1);
    const Tensor y = spt::transform(Tensor::from({1, 1}, {0.25}), Tensor::from({1, 3}, {1, 0, 0}), one);
    CHECK(y.item() == doctest::Approx(sigmoid_ref(std::pow(0.25, 0.21))).epsilon(1e-14));
    CHECK(y.item() == doctest::Approx(0.6786).epsilon(1e-4));
  }
}

TEST_CASE("transform rejects mismatched weights") {
  const auto bank = spt::ExponentBank::build(6);
  CHECK_THROWS_AS(spt::transform(Tensor::zeros({2, 1, 2, 2}), Tensor::zeros({2, 12}), bank), ShapeError);
  CHECK_THROWS_AS(spt::transform(Tensor::zeros({2, 1, 2, 2}), Tensor::zeros({1, 13}), bank), ShapeError);
}

TEST_CASE("transform preserves intensity structure and stays inside (0, 1)") {
  const auto bank = spt::ExponentBank::build(6);
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    // 8 intensity levels over 48 pixels, so repeats are guaranteed.
    std::vector<double> levels(8), pixels(48);
    for (double& l : levels) l = rng.uniform();
    levels[0] = 0.0;
    levels[1] = 1.0;
    for (double& p : pixels) p = levels[rng.index(levels.size())];
    const Tensor x = Tensor::from({1, 1, 4, 12}, pixels);
    const Tensor w = random_tensor({1, bank.size()}, 100 + trial, -4.0, 4.0);
    const Tensor y = spt::transform(x, w, bank);
    std::map<double, double> seen;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      CHECK(y.at(i) > 0.0);
      CHECK(y.at(i) < 1.0);
      auto [it, fresh] = seen.emplace(pixels[i], y.at(i));
      if (!fresh) CHECK(it->second == y.at(i));
    }
  }
}

TEST_CASE("transform gradients") {
  const auto bank = spt::ExponentBank::build(3);
  const Tensor x = random_tensor({2, 1, 2, 3}, 7, 0.05, 1.0);
  const Tensor w = random_tensor({2, bank.size()}, 8);
  const auto rx = grad_check([&](const Tensor& t) { return weighted_sum(spt::transform(t, w, bank)); }, x);
  CHECK(rx.passed);
  const auto rw = grad_check([&](const Tensor& t) { return weighted_sum(spt::transform(x, t, bank)); }, w);
  CHECK(rw.passed);
}
