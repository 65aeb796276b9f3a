// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spinrect/gradsuite.hpp"
#include "spinrect/harness.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/recognizer.hpp"
#include "spinrect/synth.hpp"
#include "test_util.hpp"

using namespace spinrect;
using rec::Recognizer;
using rec::RecognizerConfig;
using rec::Vocabulary;
using spinrect::testing::bit_equal;
using spinrect::testing::random_tensor;

namespace {

struct Net {
  nn::ParamSet params;
  Recognizer model;
  explicit Net(std::uint64_t seed, const RecognizerConfig& c = RecognizerConfig::toy())
      : model(c, params) {
    model.init(seed);
  }
};

Tensor rendered(const std::vector<std::string>& labels) {
  std::vector<double> pixels;
  for (const auto& l : labels) {
    const auto img = synth::render_text(l, 48, 16);
    pixels.insert(pixels.end(), img.pixels.begin(), img.pixels.end());
  }
  return Tensor::from({labels.size(), 1, 16, 48}, pixels);
}

double log_softmax_at(const Tensor& logits, std::size_t row, std::size_t index) {
  const std::size_t n = logits.dim(1);
  double mx = logits.at(row * n);
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, logits.at(row * n + j));
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::exp(logits.at(row * n + j) - mx);
  return logits.at(row * n + index) - mx - std::log(s);
}

// One AdaDelta step on the recognizer alone, in training mode.
double train_step(Net& net, harness::AdaDelta& opt, const Tensor& x, const std::vector<std::string>& labels,
                  double lr) {
  double value = 0.0;
  {
    Tape tape;
    TapeScope scope(tape);
    net.model.set_training(true);
    const Tensor loss = net.model.loss(x, labels);
    net.model.set_training(false);
    value = loss.item();
    tape.backward(loss);
  }
  opt.step(net.params, lr);
  net.params.zero_grad();
  return value;
}

const std::vector<std::string> kTen = {"0", "17", "254", "3096", "48", "5", "6213", "79", "881", "90"};

}  // namespace

TEST_CASE("vocabularies") {
  const auto d = Vocabulary::digits();
  CHECK(d.size() == 11);
  CHECK(d.eos() == 10);
  CHECK(d.encode("907") == std::vector<int>{9, 0, 7});
  CHECK_THROWS_AS(d.encode("9a"), std::invalid_argument);
  CHECK(d.decode({4, 2, 10, 3}) == "42");
  CHECK(d.filter("4-2") == "4-2");
  for (std::size_t i = 0; i < d.eos(); ++i) CHECK(d.index_of(d.symbol(i)) == static_cast<int>(i));

  const auto p = Vocabulary::paper();
  CHECK(p.size() == 69);
  CHECK(p.filter("a-b!9") == "ab9");
  std::string seen;
  for (std::size_t i = 0; i < p.eos(); ++i) {
    CHECK(p.index_of(p.symbol(i)) == static_cast<int>(i));
    CHECK(seen.find(p.symbol(i)) == std::string::npos);
    seen += p.symbol(i);
  }
}

TEST_CASE("encoder sequence length and shapes") {
  Net net(1);
  const auto enc = net.model.encode(random_tensor({2, 1, 16, 48}, 1, 0.0, 1.0));
  CHECK(enc.length() == 12);
  CHECK(enc.sequence.shape() == Shape{2, 12, 128});
  CHECK(enc.projected.shape() == Shape{2, 12, 64});

  nn::ParamSet params;
  Recognizer paper(RecognizerConfig::paper_shaped(), params);
  paper.init(2);
  CHECK(paper.features(random_tensor({1, 1, 32, 100}, 2, 0.0, 1.0)).shape() == Shape{1, 512, 1, 25});
}

TEST_CASE("height that does not collapse is an error") {
  Net net(1);
  CHECK_THROWS_AS(net.model.encode(Tensor::zeros({1, 1, 32, 48})), ShapeError);
  RecognizerConfig c = RecognizerConfig::toy();
  c.input_height = 32;
  Net tall(1, c);
  CHECK_THROWS_AS(tall.model.encode(Tensor::zeros({1, 1, 32, 48})), ShapeError);
}

TEST_CASE("zero image encodes deterministically") {
  Net net(3);
  const Tensor zero = Tensor::zeros({2, 1, 16, 48});
  const auto a = net.model.encode(zero), b = net.model.encode(zero);
  CHECK(bit_equal(a.sequence, b.sequence));
  const std::size_t per = a.sequence.numel() / 2;
  for (std::size_t i = 0; i < per; ++i) CHECK(a.sequence.at(i) == a.sequence.at(per + i));
}

TEST_CASE("encoding is batch independent bit-exactly") {
  Net net(4);
  for (const char* n : {"rec.bn1.running_mean", "rec.bn2.running_var"}) {
    Tensor t = net.params.get(n);
    for (double& v : t.mutable_data()) v += 0.25;
  }
  const Tensor x = random_tensor({3, 1, 16, 48}, 5, 0.0, 1.0);
  const auto all = net.model.encode(x);
  for (std::size_t b = 0; b < 3; ++b) {
    const auto one = net.model.encode(slice(x, 0, b, b + 1));
    CHECK(bit_equal(one.sequence, slice(all.sequence, 0, b, b + 1)));
  }
}

TEST_CASE("zeroed attention scores give the mean encoder vector") {
  Net net(5);
  Tensor score = net.params.get("rec.attention.score");
  nn::fill(score, 0.0);
  const Tensor x = random_tensor({2, 1, 16, 48}, 6, 0.0, 1.0);
  const auto enc = net.model.encode(x);
  const auto r = net.model.decode_step(net.model.initial_state(2), enc);
  const std::size_t len = enc.length(), width = enc.sequence.dim(2);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t t = 0; t < len; ++t) CHECK(r.state.attention.at(b * len + t) == doctest::Approx(1.0 / len));
    for (std::size_t j = 0; j < width; ++j) {
      double m = 0.0;
      for (std::size_t t = 0; t < len; ++t) m += enc.sequence.at((b * len + t) * width + j);
      CHECK(r.context.at(b * width + j) == doctest::Approx(m / len).epsilon(1e-12));
    }
  }
}

TEST_CASE("attention weights are a distribution at every step") {
  Net net(7);
  const Tensor x = random_tensor({3, 1, 16, 48}, 8, 0.0, 1.0);
  const auto enc = net.model.encode(x);
  auto state = net.model.initial_state(3);
  for (int step = 0; step < 6; ++step) {
    auto r = net.model.decode_step(state, enc);
    for (std::size_t b = 0; b < 3; ++b) {
      double s = 0.0;
      for (std::size_t t = 0; t < enc.length(); ++t) {
        const double w = r.state.attention.at(b * enc.length() + t);
        CHECK(w >= 0.0);
        s += w;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    state = std::move(r.state);
    state.previous.assign(3, step % 10);
  }
}

TEST_CASE("teacher-forced loss matches manual decoding") {
  Net net(9);
  const Tensor x = random_tensor({1, 1, 16, 48}, 10, 0.0, 1.0);
  const auto enc = net.model.encode(x);
  const int eos = static_cast<int>(Vocabulary::digits().eos());
  const auto first = net.model.decode_step(net.model.initial_state(1), enc);
  SUBCASE("empty label is the end-of-sequence log-likelihood of step one") {
    CHECK(net.model.loss(x, {""}).item() == doctest::Approx(-log_softmax_at(first.logits, 0, eos)).epsilon(1e-12));
  }
  SUBCASE("one symbol is the cross-entropy of two steps") {
    auto state = first.state;
    state.previous = {7};
    const auto second = net.model.decode_step(state, enc);
    const double expect = -log_softmax_at(first.logits, 0, 7) - log_softmax_at(second.logits, 0, eos);
    CHECK(net.model.loss(x, {"7"}).item() == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("batch loss is the mean of per-image losses") {
    const Tensor two = random_tensor({2, 1, 16, 48}, 11, 0.0, 1.0);
    const double l0 = net.model.loss(slice(two, 0, 0, 1), {"12"}).item();
    const double l1 = net.model.loss(slice(two, 0, 1, 2), {"345"}).item();
    CHECK(net.model.loss(two, {"12", "345"}).item() == doctest::Approx((l0 + l1) / 2).epsilon(1e-12));
  }
  CHECK_THROWS_AS(net.model.loss(x, {"1", "2"}), ShapeError);
}

TEST_CASE("decoding") {
  Net net(12);
  const Tensor x = random_tensor({4, 1, 16, 48}, 13, 0.0, 1.0);
  SUBCASE("terminates within the maximum length and is deterministic") {
    const auto a = net.model.recognize(x);
    CHECK(a.size() == 4);
    for (const auto& s : a) CHECK(s.size() <= 25);
    CHECK(a == net.model.recognize(x));
  }
  SUBCASE("end-of-sequence first gives the empty string") {
    Tensor bias = net.params.get("rec.classifier.bias");
    bias.mutable_data()[Vocabulary::digits().eos()] = 1e6;
    CHECK(net.model.recognize(x) == std::vector<std::string>(4, ""));
  }
  SUBCASE("never emitting end-of-sequence stops at the maximum length") {
    Tensor bias = net.params.get("rec.classifier.bias");
    bias.mutable_data()[3] = 1e6;
    CHECK(net.model.recognize(x) == std::vector<std::string>(4, std::string(25, '3')));
  }
}

TEST_CASE("overfits ten samples in 500 steps") {
  Net net(14);
  const Tensor x = rendered(kTen);
  harness::AdaDelta opt(net.params, 0.95, 1e-6, 5.0);
  for (int step = 0; step < 500; ++step) train_step(net, opt, x, kTen, 1.0);
  CHECK(net.model.recognize(x) == kTen);
}

TEST_CASE("teacher-forced loss decreases monotonically at learning rate 0.1") {
  const Tensor x = rendered(kTen);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    CAPTURE(seed);
    Net net(seed);
    harness::AdaDelta opt(net.params, 0.95, 1e-6, 5.0);
    double previous = train_step(net, opt, x, kTen, 0.1);
    for (int step = 1; step < 50; ++step) {
      const double l = train_step(net, opt, x, kTen, 0.1);
      CHECK(l < previous);
      previous = l;
    }
  }
}

TEST_CASE("recognizer gradient cases") {
  for (const char* filter : {"lstm_cell", "recognizer", "batch_norm", "channel_affine"}) {
    const auto results = run_grad_suite(filter);
    REQUIRE_FALSE(results.empty());
    for (const auto& r : results) {
      CAPTURE(r.name);
      CHECK(r.report.passed);
      CHECK(r.report.max_rel_error < r.tolerance);
    }
  }
}
