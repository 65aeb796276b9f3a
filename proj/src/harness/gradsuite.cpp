// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/gradsuite.hpp"

#include <cmath>

#include "spinrect/harness.hpp"
#include "spinrect/nn.hpp"
#include "spinrect/ops.hpp"
#include "spinrect/random.hpp"
#include "spinrect/spin.hpp"
#include "spinrect/spt.hpp"
#include "spinrect/tps.hpp"

namespace spinrect {
namespace {

constexpr double kOpTol = 1e-4;
constexpr double kRecognizerTol = 1e-3;

Tensor random(Shape shape, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v));
}

// Contracts y with fixed random weights so every output element matters.
Tensor weighted_sum(const Tensor& y, std::uint64_t seed = 99) {
  return sum(mul(y, random(y.shape(), seed, -1.0, 1.0)));
}

Tensor find_param(const nn::ParamSet& params, const std::string& suffix) {
  for (const auto& [name, t] : params.entries()) {
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return t;
    }
  }
  throw std::invalid_argument("no parameter ending in " + suffix);
}

void jitter(Tensor t, std::uint64_t seed, double amplitude) {
  Rng rng(seed);
  for (double& v : t.mutable_data()) v += amplitude * rng.uniform(-1.0, 1.0);
}

struct Case {
  std::string name;
  double tolerance;
  std::function<GradCheckReport(const GradCheckOptions&)> run;
};

GradCheckOptions net_options(GradCheckOptions o, std::size_t coords) {
  o.max_coords = coords;
  o.skip_kinks = true;
  return o;
}

// The failing report if exactly one failed, else the larger error.
GradCheckReport worse(const GradCheckReport& a, const GradCheckReport& b) {
  if (a.passed != b.passed) return a.passed ? b : a;
  return b.max_rel_error > a.max_rel_error ? b : a;
}

std::vector<Case> build_cases() {
  std::vector<Case> cases;
  auto unary = [&](std::string name, Tensor x, std::function<Tensor(const Tensor&)> f,
                   bool kinks = false) {
    cases.push_back({std::move(name), kOpTol, [x, f, kinks](GradCheckOptions o) {
                       o.skip_kinks = kinks;
                       return grad_check([&](const Tensor& t) { return weighted_sum(f(t)); }, x, o);
                     }});
  };
  const Tensor a = random({3, 4}, 1, -1.0, 1.0);
  const Tensor b = random({3, 4}, 2, -1.0, 1.0);
  const Tensor pos = random({3, 4}, 3, 0.2, 0.95);

  unary("add", a, [b](const Tensor& t) { return add(t, b); });
  unary("sub.lhs", a, [b](const Tensor& t) { return sub(t, b); });
  unary("sub.rhs", b, [a](const Tensor& t) { return sub(a, t); });
  unary("mul", a, [b](const Tensor& t) { return mul(t, b); });
  unary("mul.self", a, [](const Tensor& t) { return mul(t, t); });
  unary("scale", a, [](const Tensor& t) { return scale(t, -2.5); });
  unary("add_scalar", a, [](const Tensor& t) { return add_scalar(t, 0.7); });
  for (double beta : {0.03, 0.43, 1.0, 1.52, 12.5, 33.33}) {
    unary("pow." + std::to_string(beta).substr(0, 5), pos, [beta](const Tensor& t) { return pow(t, beta); });
  }
  unary("pow.integer_negative_base", a, [](const Tensor& t) { return pow(t, 3.0); });
  unary("sigmoid", scale(a, 3.0).detach(), [](const Tensor& t) { return sigmoid(t); });
  unary("tanh", a, [](const Tensor& t) { return tanh(t); });
  unary("exp", a, [](const Tensor& t) { return exp(t); });
  unary("log", pos, [](const Tensor& t) { return log(t); });
  unary("relu", a, [](const Tensor& t) { return relu(t); }, true);
  unary("softmax", scale(a, 2.0).detach(), [](const Tensor& t) { return softmax(t); });
  unary("sum", a, [](const Tensor& t) { return scale(sum(t), 1.5); });
  unary("mean", a, [](const Tensor& t) { return scale(mean(t), 1.5); });
  const Tensor m = random({4, 5}, 4, -1.0, 1.0);
  unary("matmul.lhs", a, [m](const Tensor& t) { return matmul(t, m); });
  unary("matmul.rhs", m, [a](const Tensor& t) { return matmul(a, t); });
  const Tensor ba = random({2, 3, 4}, 5, -1.0, 1.0), bb = random({2, 4, 2}, 6, -1.0, 1.0);
  unary("matmul.batched.lhs", ba, [bb](const Tensor& t) { return matmul(t, bb); });
  unary("matmul.batched.rhs", bb, [ba](const Tensor& t) { return matmul(ba, t); });
  const Tensor img = random({2, 2, 5, 6}, 7, -1.0, 1.0);
  const Tensor cw = random({3, 2, 3, 3}, 8, -0.5, 0.5), cb = random({3}, 9, -0.5, 0.5);
  unary("conv2d.input", img, [cw, cb](const Tensor& t) { return conv2d(t, cw, cb); });
  unary("conv2d.weight", cw, [img, cb](const Tensor& t) { return conv2d(img, t, cb); });
  unary("conv2d.bias", cb, [img, cw](const Tensor& t) { return conv2d(img, cw, t); });
  unary("maxpool2d", img, [](const Tensor& t) { return maxpool2d(t, 2, 2, 2, 2); }, true);
  unary("maxpool2d.2x1", img, [](const Tensor& t) { return maxpool2d(t, 2, 1, 2, 1); }, true);
  const Tensor gamma = random({2}, 40, 0.5, 1.5), beta = random({2}, 41, -0.5, 0.5);
  unary("batch_norm.input", img, [gamma, beta](const Tensor& t) { return batch_norm(t, gamma, beta, 1e-5); });
  unary("batch_norm.gamma", gamma, [img, beta](const Tensor& t) { return batch_norm(img, t, beta, 1e-5); });
  unary("batch_norm.beta", beta, [img, gamma](const Tensor& t) { return batch_norm(img, gamma, t, 1e-5); });
  unary("channel_affine.input", img, [gamma, beta](const Tensor& t) { return channel_affine(t, gamma, beta); });
  unary("channel_affine.scale", gamma, [img, beta](const Tensor& t) { return channel_affine(img, t, beta); });
  unary("channel_affine.shift", beta, [img, gamma](const Tensor& t) { return channel_affine(img, gamma, t); });
  unary("global_avg_pool", img, [](const Tensor& t) { return global_avg_pool(t); });
  unary("resize_bilinear", random({1, 2, 2, 3}, 10, -1.0, 1.0),
        [](const Tensor& t) { return resize_bilinear(t, 5, 7); });
  unary("concat", a, [b](const Tensor& t) {
    const Tensor parts[] = {t, b, t};
    return concat(parts, 1);
  });
  unary("slice", img, [](const Tensor& t) { return slice(t, 3, 1, 4); });
  unary("reshape", img, [](const Tensor& t) { return reshape(t, {4, 30}); });
  unary("expand", random({2, 1, 3}, 11, -1.0, 1.0), [](const Tensor& t) { return expand(t, {2, 4, 3}); });
  const std::vector<int> targets = {2, -1, 0};
  cases.push_back({"cross_entropy", kOpTol, [a, targets](GradCheckOptions o) {
                     return grad_check([&](const Tensor& t) { return cross_entropy(t, targets); }, a, o);
                   }});

  cases.push_back({"lstm_cell", kOpTol, [](GradCheckOptions o) {
                     nn::ParamSet ps;
                     nn::LstmCell cell(ps, "cell", 3, 4);
                     cell.init(5);
                     const Tensor x = random({2, 3}, 12, -1.0, 1.0);
                     nn::LstmState s{random({2, 4}, 13, -0.5, 0.5), random({2, 4}, 14, -0.5, 0.5)};
                     auto f = [&](const Tensor&) {
                       const auto n = cell(x, s);
                       return add(weighted_sum(n.h, 1), weighted_sum(n.c, 2));
                     };
                     const auto r1 = grad_check(f, cell.w_hidden, o);
                     const auto r2 = grad_check([&](const Tensor& t) {
                       const auto n = cell(t, s);
                       return add(weighted_sum(n.h, 1), weighted_sum(n.c, 2));
                     }, x, o);
                     return worse(r1, r2);
                   }});

  const spt::ExponentBank bank = spt::ExponentBank::build(6);
  const Tensor spt_x = random({2, 1, 4, 5}, 15, 0.05, 0.95);
  const Tensor spt_w = random({2, 13}, 16, -1.0, 1.0);
  unary("spt_transform.input", spt_x, [spt_w, bank](const Tensor& t) { return spt::transform(t, spt_w, bank); });
  unary("spt_transform.omega", spt_w, [spt_x, bank](const Tensor& t) { return spt::transform(spt_x, t, bank); });

  const Tensor blend_x = random({2, 1, 4, 5}, 17, 0.0, 1.0);
  const Tensor blend_o = random({2, 1, 4, 5}, 18, 0.0, 1.0);
  const Tensor blend_a = random({2, 1}, 19, 0.1, 0.9);
  unary("gated_blend.input", blend_x, [=](const Tensor& t) { return spin::gated_blend(t, blend_o, blend_a); });
  unary("gated_blend.offsets", blend_o, [=](const Tensor& t) { return spin::gated_blend(blend_x, t, blend_a); });
  unary("gated_blend.alpha", blend_a, [=](const Tensor& t) { return spin::gated_blend(blend_x, blend_o, t); });

  cases.push_back({"ain_forward", kOpTol, [](GradCheckOptions o) {
                     nn::ParamSet ps;
                     spin::SpinModule spin(harness::rectifier_config(spin::Preset::toy, 6), ps);
                     spin.init(spin::InitScheme::he_random, 3);
                     const Tensor x = random({2, 1, 16, 48}, 20, 0.0, 1.0);
                     const Tensor features = spin.trunk_forward(x).detach();
                     o.skip_kinks = true;
                     return grad_check([&](const Tensor& t) { return weighted_sum(spin.ain_forward(t).upsampled); },
                                       features, o);
                   }});

  cases.push_back({"tps_grid", kOpTol, [](GradCheckOptions o) {
                     const auto canonical = tps::canonical_fiducials(40);
                     const tps::TpsKernel kernel(canonical, 6, 9);
                     std::vector<double> fid = canonical.flat();
                     fid.insert(fid.end(), fid.begin(), fid.end());
                     Tensor f = Tensor::from({2, 40}, fid);
                     jitter(f, 21, 0.1);
                     return grad_check([&](const Tensor& t) {
                       const auto g = kernel.grid(t);
                       return add(weighted_sum(g.x, 1), weighted_sum(g.y, 2));
                     }, f, o);
                   }});

  const Tensor gs_img = random({2, 1, 5, 7}, 22, 0.0, 1.0);
  const Tensor gs_x = random({2, 4, 6}, 23, -1.1, 1.1), gs_y = random({2, 4, 6}, 24, -1.1, 1.1);
  unary("grid_sample.image", gs_img, [=](const Tensor& t) { return tps::grid_sample(t, {gs_x, gs_y}); });
  unary("grid_sample.grid_x", gs_x, [=](const Tensor& t) { return tps::grid_sample(gs_img, {t, gs_y}); }, true);
  unary("grid_sample.grid_y", gs_y, [=](const Tensor& t) { return tps::grid_sample(gs_img, {gs_x, t}); }, true);

  cases.push_back({"spin_forward", kOpTol, [](GradCheckOptions o) {
                     nn::ParamSet ps;
                     spin::SpinModule spin(harness::rectifier_config(spin::Preset::toy, 6), ps);
                     spin.init(spin::InitScheme::paper_scheme, 4);
                     jitter(find_param(ps, "block8.weight"), 25, 0.05);
                     const Tensor x = random({2, 1, 16, 48}, 26, 0.05, 0.95);
                     auto f = [&](const Tensor&) { return weighted_sum(spin.forward(x)); };
                     const GradCheckOptions no = net_options(o, 40);
                     GradCheckReport worst = grad_check(
                         [&](const Tensor& t) { return weighted_sum(spin.forward(t)); }, x, no);
                     for (const char* p : {"block8.weight", "block1.weight", "block4_2.weight", "block5_2.bias"}) {
                       worst = worse(worst, grad_check(f, find_param(ps, p), no));
                     }
                     return worst;
                   }});

  cases.push_back({"ga_spin_forward", kOpTol, [](GradCheckOptions o) {
                     nn::ParamSet ps;
                     tps::GaSpin ga(harness::rectifier_config(spin::Preset::toy, 6), ps);
                     ga.init(spin::InitScheme::paper_scheme, 5);
                     jitter(find_param(ps, "block8.weight"), 27, 0.05);
                     const Tensor x = random({2, 1, 16, 48}, 28, 0.05, 0.95);
                     auto f = [&](const Tensor&) { return weighted_sum(ga.forward(x)); };
                     const GradCheckOptions no = net_options(o, 40);
                     GradCheckReport worst = grad_check(
                         [&](const Tensor& t) { return weighted_sum(ga.forward(t)); }, x, no);
                     for (const char* p : {"block8.weight", "block8.bias", "block2.weight"}) {
                       worst = worse(worst, grad_check(f, find_param(ps, p), no));
                     }
                     return worst;
                   }});

  cases.push_back({"stn_forward", kOpTol, [](GradCheckOptions o) {
                     nn::ParamSet ps;
                     tps::StnModule stn(harness::rectifier_config(spin::Preset::toy, 6), ps);
                     stn.init(6);
                     jitter(find_param(ps, "block8.weight"), 29, 0.05);
                     const Tensor x = random({2, 1, 16, 48}, 30, 0.05, 0.95);
                     const GradCheckOptions no = net_options(o, 40);
                     const auto r1 = grad_check(
                         [&](const Tensor& t) { return weighted_sum(stn.forward(t)); }, x, no);
                     const auto r2 = grad_check([&](const Tensor&) { return weighted_sum(stn.forward(x)); },
                                                find_param(ps, "block8.weight"), no);
                     return worse(r1, r2);
                   }});

  cases.push_back({"recognizer_end_to_end", kRecognizerTol, [](GradCheckOptions o) {
                     harness::Pipeline p(harness::Mode::spin, 6, spin::Preset::toy);
                     p.init(spin::InitScheme::paper_scheme, 7);
                     jitter(find_param(p.params(), "spin.block8.weight"), 31, 0.05);
                     const Tensor x = random({2, 1, 16, 48}, 32, 0.05, 0.95);
                     const std::vector<std::string> labels = {"31", "7"};
                     const GradCheckOptions no = net_options(o, 30);
                     p.set_training(true);
                     GradCheckReport worst =
                         grad_check([&](const Tensor& t) { return p.loss(t, labels); }, x, no);
                     for (const char* name : {"spin.block8.weight", "rec.conv1.weight", "rec.bn2.gamma", "rec.bilstm1.fwd.w_hidden",
                                              "rec.attention.score", "rec.decoder.w_input", "rec.classifier.weight"}) {
                       worst = worse(worst, grad_check([&](const Tensor&) { return p.loss(x, labels); },
                                                       find_param(p.params(), name), no));
                     }
                     return worst;
                   }});

  cases.push_back({"recognizer_inference", kRecognizerTol, [](GradCheckOptions o) {
                     harness::Pipeline p(harness::Mode::none, 6, spin::Preset::toy);
                     p.init(spin::InitScheme::paper_scheme, 8);
                     jitter(find_param(p.params(), "rec.bn1.running_mean"), 33, 0.1);
                     jitter(find_param(p.params(), "rec.bn3.running_var"), 34, 0.5);
                     const Tensor x = random({2, 1, 16, 48}, 35, 0.05, 0.95);
                     const std::vector<std::string> labels = {"904", "2"};
                     const GradCheckOptions no = net_options(o, 30);
                     GradCheckReport worst =
                         grad_check([&](const Tensor& t) { return p.loss(t, labels); }, x, no);
                     for (const char* name : {"rec.conv2.weight", "rec.bn1.gamma", "rec.bn4.beta"}) {
                       worst = worse(worst, grad_check([&](const Tensor&) { return p.loss(x, labels); },
                                                       find_param(p.params(), name), no));
                     }
                     return worst;
                   }});
  return cases;
}

}  // namespace

std::vector<std::string> grad_suite_names() {
  std::vector<std::string> out;
  for (const auto& c : build_cases()) out.push_back(c.name);
  return out;
}

std::vector<GradSuiteResult> run_grad_suite(const std::string& filter,
                                            const std::function<void(const GradSuiteResult&)>& on_case) {
  std::vector<GradSuiteResult> out;
  for (const auto& c : build_cases()) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    GradCheckOptions o;
    o.tolerance = c.tolerance;
    GradSuiteResult r{c.name, c.tolerance, c.run(o)};
    if (on_case) on_case(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace spinrect
