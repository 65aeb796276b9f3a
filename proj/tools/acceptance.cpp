// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Release acceptance run. Prints one PASS/FAIL line per criterion, with
// indented detail lines, and exits nonzero if any criterion fails.

#include <time.h>

#include <CLI11.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "spinrect/gradsuite.hpp"
#include "spinrect/harness.hpp"
#include "spinrect/random.hpp"
#include "spinrect/spt.hpp"
#include "spinrect/synth.hpp"
#include "spinrect/tps.hpp"

namespace fs = std::filesystem;
using namespace spinrect;
using harness::Mode;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------------------
// Pinned tolerances and budgets

constexpr double kGradOpTol = 1e-4;
constexpr double kGradRecognizerTol = 1e-3;
constexpr double kInitTol = 1e-12;
constexpr double kGridTol = 1e-6;
constexpr double kTrendMargin = 2.0;  // accuracy points
constexpr double kRunCpuBudgetS = 30 * 60;
constexpr double kTrendWallBudgetS = 3 * 3600;
constexpr double kExponentBudgetS = 1.0;
constexpr double kGradBudgetS = 5 * 60;
constexpr double kStructureBudgetS = 60;
constexpr double kDeterminismBudgetS = 5 * 60;

// Desk-scale corpora: 5k train / 1k test per mix, severity 1.
constexpr std::size_t kTrainCount = 5000, kTestCount = 1000;
struct CorpusDef {
  const char* name;
  synth::Mix mix;
  std::uint64_t train_seed, test_seed;
};
constexpr CorpusDef kChromatic{"chromatic", synth::Mix::chromatic, 101, 102};
constexpr CorpusDef kCombined{"combined", synth::Mix::combined, 201, 202};

// Trend-run schedule shared by every mode.
constexpr std::size_t kTrendEpochs = 14;
const std::vector<std::size_t> kTrendDecay{13, 14};
constexpr std::size_t kTrendWarmup = 626;  // two epochs of 313 batches
constexpr double kTrendRectifierLrScale = 0.1;
const std::vector<std::uint64_t> kTrendSeeds{1, 2, 3};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> details;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "bad  ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double thread_cpu_seconds() {
  timespec ts{};
  ::clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double sigmoid_ref(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Tensor uniform_images(std::size_t batch, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(batch * h * w);
  for (double& x : v) x = rng.uniform();
  return Tensor::from({batch, 1, h, w}, std::move(v));
}

// ---------------------------------------------------------------------------
// 1. Exponent bank against 100-digit MPFR arithmetic

using Big = boost::multiprecision::mpfr_float_100;

long hundredths(const Big& v) {
  const Big scaled = v * 100;
  const Big r = scaled >= 0 ? boost::multiprecision::floor(scaled + Big("0.5"))
                            : boost::multiprecision::ceil(scaled - Big("0.5"));
  return r.convert_to<long>();
}

std::vector<std::string> oracle_bank(std::size_t k) {
  std::vector<long> h(2 * k + 1);
  const Big denom = Big(2 * (k + 1));
  for (std::size_t i = 1; i <= k + 1; ++i) {
    const Big t = Big(i) / denom;
    h[i - 1] = hundredths(boost::multiprecision::log(1 - t) / boost::multiprecision::log(t));
  }
  for (std::size_t i = k + 2; i <= 2 * k + 1; ++i) h[i - 1] = hundredths(Big(100) / Big(h[i - 2 - k]));
  std::vector<std::string> out;
  for (long v : h) out.push_back(std::to_string(v / 100) + "." + (v % 100 < 10 ? "0" : "") + std::to_string(v % 100));
  return out;
}

std::string run_command(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  status = ::pclose(pipe);
  return out;
}

Verdict criterion_exponents(const std::string& cli) {
  Verdict v;
  const auto t0 = Clock::now();
  for (std::size_t k : {0u, 1u, 6u, 12u}) {
    int status = 0;
    const std::string out = run_command(cli + " exponents --k " + std::to_string(k), status);
    std::vector<std::string> rows;
    std::stringstream in(out);
    for (std::string line; std::getline(in, line);) rows.push_back(line);
    const auto expect = oracle_bank(k);
    v.check(status == 0 && rows == expect, "K=" + std::to_string(k) + ": " + std::to_string(rows.size()) +
                                               " exponents match the MPFR evaluation");
    v.check(rows.size() > k && rows[k] == "1.00", "K=" + std::to_string(k) + ": middle exponent is 1.00");
  }
  const double s = seconds_since(t0);
  v.check(s < kExponentBudgetS, "runtime " + fmt("%.3f", s) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 2. Gradient suite

Verdict criterion_gradients() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto results = run_grad_suite();
  std::set<std::string> names;
  std::size_t failed = 0;
  double worst_op = 0.0, worst_rec = 0.0;
  for (const auto& r : results) {
    names.insert(r.name);
    const bool rec = r.name.rfind("recognizer", 0) == 0;
    const double tol = rec ? kGradRecognizerTol : kGradOpTol;
    (rec ? worst_rec : worst_op) = std::max(rec ? worst_rec : worst_op, r.report.max_rel_error);
    if (!(r.report.max_rel_error < tol) || r.report.checked == 0) {
      ++failed;
      v.check(false, r.name + ": max rel err " + fmt("%.3e", r.report.max_rel_error));
    }
  }
  v.check(failed == 0, std::to_string(results.size()) + " cases, " + std::to_string(failed) + " failed");
  v.note("worst op/module rel err " + fmt("%.2e", worst_op) + ", recognizer " + fmt("%.2e", worst_rec));
  const std::vector<std::string> required = {
      "add", "sub", "mul", "scale", "pow", "sigmoid", "tanh", "exp", "log", "softmax", "matmul",
      "conv2d", "maxpool2d", "global_avg_pool", "resize_bilinear", "concat", "slice", "reshape",
      "cross_entropy", "spt_transform", "ain_forward", "gated_blend", "tps_grid", "grid_sample",
      "spin_forward", "ga_spin_forward", "recognizer_end_to_end"};
  std::string missing;
  for (const auto& r : required) {
    bool found = false;
    for (const auto& n : names) found = found || n == r || n.rfind(r + ".", 0) == 0;
    if (!found) missing += " " + r;
  }
  v.check(missing.empty(), "coverage of every required operation" + (missing.empty() ? "" : ", missing:" + missing));
  const double s = seconds_since(t0);
  v.check(s < kGradBudgetS, "runtime " + fmt("%.1f", s) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 3. Structure preservation with the offset branch disabled

std::size_t structure_violations(const Tensor& x, const Tensor& y) {
  std::map<double, double> seen;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    auto [it, fresh] = seen.emplace(x.at(i), y.at(i));
    if (!fresh && it->second != y.at(i)) ++bad;
  }
  return bad;
}

Verdict criterion_structure() {
  Verdict v;
  const auto t0 = Clock::now();
  constexpr std::size_t kPairs = 1000, kModels = 50;
  auto cfg = spin::SpinConfig::toy();
  cfg.ain_enabled = false;
  const std::size_t h = cfg.input_height, w = cfg.input_width;
  const auto bank = spt::ExponentBank::build(cfg.k);
  std::vector<std::unique_ptr<nn::ParamSet>> params;
  std::vector<std::unique_ptr<spin::SpinModule>> models;
  for (std::size_t m = 0; m < kModels; ++m) {
    params.push_back(std::make_unique<nn::ParamSet>());
    models.push_back(std::make_unique<spin::SpinModule>(cfg, *params.back()));
    models.back()->init(spin::InitScheme::he_random, 7000 + m);
  }
  std::size_t direct = 0, through_module = 0, repeated = 0;
  Rng rng(20260);
  for (std::size_t p = 0; p < kPairs; ++p) {
    // Few intensity levels so every level repeats many times.
    std::vector<double> levels(2 + rng.index(7));
    for (double& l : levels) l = rng.uniform();
    std::vector<double> pixels(h * w);
    for (double& px : pixels) px = levels[rng.index(levels.size())];
    const Tensor x = Tensor::from({1, 1, h, w}, pixels);
    std::vector<double> omega(bank.size());
    for (double& o : omega) o = rng.uniform(-4.0, 4.0);
    direct += structure_violations(x, spt::transform(x, Tensor::from({1, omega.size()}, omega), bank));
    through_module += structure_violations(x, models[p % kModels]->forward(x));
    repeated += pixels.size() - levels.size();
  }
  v.check(direct == 0, std::to_string(kPairs) + " random (image, omega) pairs through the transform: " +
                           std::to_string(direct) + " violations");
  v.check(through_module == 0, std::to_string(kPairs) + " images through " + std::to_string(kModels) +
                                   " randomly initialized rectifiers: " + std::to_string(through_module) +
                                   " violations");
  v.note("repeated-level pixels compared per pass: about " + std::to_string(repeated));
  const double s = seconds_since(t0);
  v.check(s < kStructureBudgetS, "runtime " + fmt("%.1f", s) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// 4. Initialization identities

double grid_identity_error(const tps::SamplingGrid& g) {
  const auto id = tps::identity_grid(g.x.dim(0), g.x.dim(1), g.x.dim(2));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.x.numel(); ++i) {
    worst = std::max({worst, std::abs(g.x.at(i) - id.x.at(i)), std::abs(g.y.at(i) - id.y.at(i))});
  }
  return worst;
}

Verdict criterion_init() {
  Verdict v;
  const double alpha = sigmoid_ref(-1.0);
  for (spin::Preset preset : {spin::Preset::toy, spin::Preset::paper}) {
    const std::string tag(harness::name(preset));
    const auto cfg = harness::rectifier_config(preset, 6);
    const Tensor x = uniform_images(2, cfg.input_height, cfg.input_width, 41);
    {
      nn::ParamSet params;
      spin::SpinModule m(cfg, params);
      m.init(spin::InitScheme::paper_scheme, 3);
      const auto t = m.trace(x);
      double worst = 0.0, alpha_err = 0.0;
      for (std::size_t i = 0; i < x.numel(); ++i) {
        const double g = (1 - alpha) * x.at(i) + alpha * t.offsets.upsampled.at(i);
        worst = std::max(worst, std::abs(t.output.at(i) - sigmoid_ref(g)));
      }
      for (std::size_t b = 0; b < 2; ++b) alpha_err = std::max(alpha_err, std::abs(t.alpha.at(b) - alpha));
      v.check(worst < kInitTol && alpha_err < kInitTol,
              tag + " SPIN: |y - sigmoid(g(x))| max " + fmt("%.1e", worst) + ", alpha error " + fmt("%.1e", alpha_err));
    }
    {
      auto gcfg = cfg;
      gcfg.ga_enabled = true;
      nn::ParamSet params;
      tps::GaSpin ga(gcfg, params);
      ga.init(spin::InitScheme::paper_scheme, 4);
      const double e = grid_identity_error(ga.trace(x).grid);
      v.check(e < kGridTol, tag + " GA-SPIN: TPS grid deviates from identity by " + fmt("%.1e", e));
    }
    {
      nn::ParamSet params;
      tps::StnModule stn(cfg, params);
      stn.init(5);
      const Tensor y = stn.forward(x);
      double worst = 0.0;
      for (std::size_t i = 0; i < x.numel(); ++i) worst = std::max(worst, std::abs(y.at(i) - x.at(i)));
      v.check(worst < kInitTol, tag + " STN: output differs from input by " + fmt("%.1e", worst));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// 5. Paper-preset layer sizes

std::string wxh(const Shape& s) {
  if (s.size() == 4) return std::to_string(s[3]) + "x" + std::to_string(s[2]);
  return std::to_string(s.back());
}

Verdict criterion_shapes() {
  Verdict v;
  for (std::size_t k : {6u, 0u, 12u}) {
    const auto cfg = spin::SpinConfig::paper(k);
    nn::ParamSet params;
    spin::SpinModule m(cfg, params);
    m.init(spin::InitScheme::paper_scheme, 1);
    const auto t = m.trace(uniform_images(1, cfg.input_height, cfg.input_width, 9));
    std::map<std::string, Shape> got;
    for (const auto& [name, value] : t.backbone.blocks) got[name] = value.shape();
    const std::string kk = "K=" + std::to_string(k) + " ";
    const std::vector<std::pair<std::string, std::string>> table = {
        {"block1", "50x16"}, {"block2", "25x8"}, {"block3", "12x4"}, {"block4_1", "6x2"},
        {"block5_1", "3x1"}, {"block6", "3x1"}, {"block7", "256"}, {"block8", std::to_string(2 * k + 2)}};
    for (const auto& [block, expect] : table) {
      const bool present = got.count(block) > 0;
      v.check(present && wxh(got[block]) == expect,
              kk + block + " " + (present ? wxh(got[block]) : std::string("missing")) + " (expect " + expect + ")");
    }
    v.check(wxh(t.offsets.coarse.shape()) == "6x2",
            kk + "offset branch block4_2/block5_2 " + wxh(t.offsets.coarse.shape()) +
                " (expect 6x2; block4_2 pools with stride 2x2)");
    v.check(got.count("block6") && got["block6"][1] == 512 && got.count("block7") && got["block7"].size() == 2,
            kk + "block6 512x3x1 is averaged to a 512-vector before the 512->256 linear block7");
  }
  return v;
}

// ---------------------------------------------------------------------------
// 6 and 7. Trend runs

struct Corpora {
  fs::path root;
  std::map<std::string, harness::TrainData> data;

  const harness::TrainData& get(const CorpusDef& def) {
    auto it = data.find(def.name);
    if (it != data.end()) return it->second;
    const fs::path train = root / (std::string(def.name) + "_train");
    const fs::path test = root / (std::string(def.name) + "_test");
    synth::build_corpus(train, {kTrainCount, def.mix, 1.0, def.train_seed});
    synth::build_corpus(test, {kTestCount, def.mix, 1.0, def.test_seed});
    harness::TrainData d{synth::load_corpus(train), synth::load_corpus(test)};
    return data.emplace(def.name, std::move(d)).first->second;
  }
};

struct TrendRun {
  Mode mode = Mode::none;
  std::size_t k = 0;
  const CorpusDef* corpus = nullptr;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double cpu_s = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> bank;
};

harness::TrainConfig trend_config(const TrendRun& r, const fs::path& out) {
  harness::TrainConfig c;
  c.mode = r.mode;
  c.k = r.k;
  c.preset = spin::Preset::toy;
  c.init = spin::InitScheme::paper_scheme;
  c.epochs = kTrendEpochs;
  c.lr_decay_epochs = kTrendDecay;
  c.rectifier_warmup = kTrendWarmup;
  c.rectifier_lr_scale = kTrendRectifierLrScale;
  c.batch_size = 16;
  c.lr = 1.0;
  c.seed = r.seed;
  c.log_every = 100;
  c.out_dir = out.string();
  return c;
}

std::string run_name(const TrendRun& r) {
  return std::string(r.corpus->name) + "/" + std::string(harness::name(r.mode)) + "_k" + std::to_string(r.k) +
         "_s" + std::to_string(r.seed);
}

double mean_acc(const std::vector<TrendRun>& runs, Mode mode, std::size_t k, const CorpusDef& c) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.ok && r.mode == mode && r.k == k && r.corpus == &c) {
      s += r.acc;
      ++n;
    }
  }
  return n == kTrendSeeds.size() ? 100.0 * s / static_cast<double>(n) : std::nan("");
}

std::vector<TrendRun> run_trends(Corpora& corpora, const fs::path& work, double& wall_s) {
  std::vector<TrendRun> runs;
  auto add = [&](Mode mode, std::size_t k, const CorpusDef& c, std::uint64_t seed) {
    TrendRun r;
    r.mode = mode;
    r.k = k;
    r.corpus = &c;
    r.seed = seed;
    runs.push_back(r);
  };
  for (std::uint64_t seed : kTrendSeeds) {
    add(Mode::none, 6, kChromatic, seed);
    add(Mode::spin, 6, kChromatic, seed);
    add(Mode::spin, 0, kChromatic, seed);
    add(Mode::stn, 6, kCombined, seed);
    add(Mode::ga_spin, 6, kCombined, seed);
    add(Mode::spin_stn, 6, kCombined, seed);
  }
  const auto t0 = Clock::now();
  std::ofstream csv(work / "trend_runs.csv");
  csv << "corpus,mode,k,seed,seq_acc,cpu_s\n";
  for (auto& r : runs) {
    const auto& data = corpora.get(*r.corpus);
    const fs::path out = work / "runs" / run_name(r);
    const double c0 = thread_cpu_seconds();
    try {
      const auto result = harness::train(trend_config(r, out), data);
      r.acc = result.final_eval.seq_acc;
      r.ok = true;
      // The bank the trained model actually used, read back from disk.
      const auto ckpt = harness::load_checkpoint(out / "checkpoint.bin");
      const auto cfg = harness::TrainConfig::from_text(ckpt.config_text);
      harness::Pipeline p(cfg.mode, cfg.k, cfg.preset);
      harness::restore(ckpt, p, nullptr);
      if (p.spin()) r.bank = p.spin()->bank().betas();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.cpu_s = thread_cpu_seconds() - c0;
    csv << r.corpus->name << "," << harness::name(r.mode) << "," << r.k << "," << r.seed << ","
        << (r.ok ? fmt("%.4f", r.acc) : "failed") << "," << fmt("%.1f", r.cpu_s) << std::endl;
    std::cerr << "  run " << run_name(r) << ": " << (r.ok ? fmt("%.4f", r.acc) : "failed: " + r.error) << " in "
              << fmt("%.0f", r.cpu_s) << " CPU s" << std::endl;
  }
  wall_s = seconds_since(t0);
  return runs;
}

Verdict criterion_trend(const std::vector<TrendRun>& runs, double wall_s) {
  Verdict v;
  std::size_t failed = 0;
  double worst_cpu = 0.0;
  for (const auto& r : runs) {
    failed += !r.ok;
    worst_cpu = std::max(worst_cpu, r.cpu_s);
  }
  v.check(failed == 0, std::to_string(runs.size()) + " runs, " + std::to_string(failed) + " failed");
  for (const auto& r : runs) {
    v.note(run_name(r) + ": " + (r.ok ? fmt("%.3f", r.acc) : "failed: " + r.error) + ", " + fmt("%.0f", r.cpu_s) +
           " CPU s");
  }
  const double none = mean_acc(runs, Mode::none, 6, kChromatic);
  const double spin = mean_acc(runs, Mode::spin, 6, kChromatic);
  const double stn = mean_acc(runs, Mode::stn, 6, kCombined);
  const double ga = mean_acc(runs, Mode::ga_spin, 6, kCombined);
  const double spin_stn = mean_acc(runs, Mode::spin_stn, 6, kCombined);
  v.check(spin >= none + kTrendMargin, "chromatic: spin " + fmt("%.2f", spin) + " >= none " + fmt("%.2f", none) +
                                           " + " + fmt("%.1f", kTrendMargin));
  v.check(ga >= stn + kTrendMargin,
          "combined: ga-spin " + fmt("%.2f", ga) + " >= stn " + fmt("%.2f", stn) + " + " + fmt("%.1f", kTrendMargin));
  v.check(spin_stn >= stn, "combined: spin+stn " + fmt("%.2f", spin_stn) + " >= stn " + fmt("%.2f", stn));
  v.check(worst_cpu <= kRunCpuBudgetS, "slowest run " + fmt("%.0f", worst_cpu) + " CPU s");
  v.check(wall_s <= kTrendWallBudgetS, "all runs " + fmt("%.0f", wall_s) + " s wall");
  return v;
}

Verdict criterion_ksweep(const std::vector<TrendRun>& runs) {
  Verdict v;
  const double k6 = mean_acc(runs, Mode::spin, 6, kChromatic);
  const double k0 = mean_acc(runs, Mode::spin, 0, kChromatic);
  v.check(k6 >= k0, "chromatic spin: K=6 " + fmt("%.2f", k6) + " >= K=0 " + fmt("%.2f", k0));
  bool single = true;
  std::size_t seen = 0;
  for (const auto& r : runs) {
    if (r.mode != Mode::spin || r.k != 0) continue;
    ++seen;
    single = single && r.ok && r.bank == std::vector<double>{1.0};
  }
  v.check(seen == kTrendSeeds.size() && single, "every K=0 checkpoint restores the single-exponent bank [1.00]");
  return v;
}

// ---------------------------------------------------------------------------
// 8. Random initialization

Verdict criterion_random_init(Corpora& corpora) {
  Verdict v;
  const auto& data = corpora.get(kChromatic);
  for (std::uint64_t seed : kTrendSeeds) {
    harness::TrainConfig c;
    c.mode = Mode::spin;
    c.init = spin::InitScheme::he_random;
    c.epochs = 1;
    c.max_steps = 200;
    c.seed = seed;
    c.log_every = 50;
    std::size_t finite = 0, steps = 0;
    double last = std::nan("");
    try {
      const auto r = harness::train(c, data);
      steps = r.step_losses.size();
      for (double l : r.step_losses) finite += std::isfinite(l);
      if (steps) last = r.step_losses.back();
    } catch (const std::exception& e) {
      v.note(std::string("seed ") + std::to_string(seed) + ": " + e.what());
    }
    v.check(steps == 200 && finite == steps, "seed " + std::to_string(seed) + ": " + std::to_string(finite) + "/" +
                                                 std::to_string(steps) + " finite losses, last " + fmt("%.3f", last));
  }
  return v;
}

// ---------------------------------------------------------------------------
// 9. Determinism and persistence

bool same_tensor(const Tensor& a, const Tensor& b) { return a.shape() == b.shape() && a.to_vector() == b.to_vector(); }

Verdict criterion_determinism(Corpora& corpora, const fs::path& work) {
  Verdict v;
  const auto t0 = Clock::now();
  const auto& data = corpora.get(kChromatic);
  harness::TrainConfig c;
  c.mode = Mode::ga_spin;
  c.epochs = 2;
  c.lr_decay_epochs = {2};
  c.train_limit = 320;
  c.test_limit = 128;
  c.log_every = 5;
  c.rectifier_warmup = 10;
  c.seed = 77;
  harness::TrainData small{{data.train.begin(), data.train.begin() + 320}, {data.test.begin(), data.test.begin() + 128}};
  c.out_dir = (work / "determinism_a").string();
  const auto a = harness::train(c, small);
  c.out_dir = (work / "determinism_b").string();
  const auto b = harness::train(c, small);
  v.check(a.log.same_metrics(b.log) && a.step_losses == b.step_losses,
          "duplicate runs: identical metrics logs (" + std::to_string(a.log.rows().size()) + " rows)");
  bool same_state = a.checkpoint.step == b.checkpoint.step && a.checkpoint.tensors.size() == b.checkpoint.tensors.size();
  for (std::size_t i = 0; same_state && i < a.checkpoint.tensors.size(); ++i) {
    same_state = a.checkpoint.tensors[i].first == b.checkpoint.tensors[i].first &&
                 same_tensor(a.checkpoint.tensors[i].second, b.checkpoint.tensors[i].second);
  }
  v.check(same_state, "duplicate runs: bit-identical parameters and optimizer state");

  // Reload from disk; the probe batch must reproduce the in-memory model.
  const auto loaded = harness::load_checkpoint(work / "determinism_a" / "checkpoint.bin");
  harness::Pipeline from_disk(c.mode, c.k, c.preset), in_memory(c.mode, c.k, c.preset);
  harness::restore(loaded, from_disk, nullptr);
  harness::restore(a.checkpoint, in_memory, nullptr);
  std::vector<std::size_t> idx(16);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = i;
    labels.push_back(small.test[i].label);
  }
  const Tensor probe = synth::to_batch(small.test, idx);
  v.check(same_tensor(from_disk.rectify(probe), in_memory.rectify(probe)) &&
              from_disk.loss(probe, labels).item() == in_memory.loss(probe, labels).item() &&
              from_disk.recognize(probe) == in_memory.recognize(probe),
          "checkpoint round trip: probe rectification, loss and transcripts bit-exact");
  const auto e = harness::evaluate(from_disk, small.test, c.batch_size);
  v.check(e.loss == a.final_eval.loss && e.correct == a.final_eval.correct,
          "reloaded checkpoint reproduces the end-of-training evaluation (loss " + fmt("%.6f", e.loss) + ")");
  const double s = seconds_since(t0);
  v.check(s < kDeterminismBudgetS, "runtime " + fmt("%.1f", s) + " s");
  return v;
}

// ---------------------------------------------------------------------------
// Release check: low-severity distortions keep labels legible

constexpr double kLegibleAcc = 0.95;

Verdict check_label_preservation(const fs::path& work) {
  Verdict v;
  const fs::path clean = work / "corpora" / "clean_train";
  const fs::path mild = work / "corpora" / "chromatic_mild_test";
  synth::build_corpus(clean, {kTrainCount, synth::Mix::clean, 0.0, 301});
  synth::build_corpus(mild, {kTestCount, synth::Mix::chromatic, 0.2, 302});
  harness::TrainConfig c;
  c.mode = Mode::none;
  c.epochs = 6;
  c.lr_decay_epochs = {5, 6};
  c.seed = 1;
  c.log_every = 100;
  const harness::TrainData data{synth::load_corpus(clean), synth::load_corpus(mild)};
  const auto r = harness::train(c, data);
  v.check(r.final_eval.seq_acc >= kLegibleAcc, "recognizer trained on clean text reads severity-0.2 chromatic text at " +
                                                   fmt("%.3f", r.final_eval.seq_acc) + " (need " +
                                                   fmt("%.2f", kLegibleAcc) + ")");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinrect acceptance run"};
  std::string cli = SPINRECT_CLI, work_arg, only, report_path;
  app.add_option("--cli", cli, "spinrect executable");
  app.add_option("--work", work_arg, "working directory for corpora and runs (default: a fresh temp dir)");
  app.add_option("--only", only, "comma-separated criteria to run, 10 being the label-preservation check (default: all)");
  app.add_option("--report", report_path, "also write the report to this file");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  {
    std::stringstream in(only);
    for (std::string item; std::getline(in, item, ',');) {
      if (!item.empty()) selected.insert(std::stoi(item));
    }
  }
  auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  const fs::path work = work_arg.empty()
                            ? fs::temp_directory_path() / ("spinrect_acceptance_" + std::to_string(::getpid()))
                            : fs::path(work_arg);
  fs::create_directories(work);
  Corpora corpora{work / "corpora", {}};

  bool all = true;
  std::ostringstream text;
  auto emit = [&](const std::string& heading, const Verdict& v) {
    all = all && v.pass;
    std::ostringstream block;
    block << heading << "\n";
    for (const auto& d : v.details) block << "    " << d << "\n";
    std::cout << block.str() << std::flush;
    text << block.str();
  };
  auto report = [&](int n, const std::string& title, const Verdict& v) {
    emit("criterion " + std::to_string(n) + " " + (v.pass ? "PASS" : "FAIL") + "  " + title, v);
  };
  auto guarded = [&](int n, const std::string& title, const std::function<Verdict()>& body) {
    if (!wanted(n)) return;
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    report(n, title, v);
  };

  guarded(1, "exponent bank", [&] { return criterion_exponents(cli); });
  guarded(2, "gradient suite", [&] { return criterion_gradients(); });
  guarded(3, "structure preservation", [&] { return criterion_structure(); });
  guarded(4, "initialization identities", [&] { return criterion_init(); });
  guarded(5, "paper preset layer sizes", [&] { return criterion_shapes(); });
  if (wanted(6) || wanted(7)) {
    std::vector<TrendRun> runs;
    double wall = 0.0;
    std::string error;
    try {
      runs = run_trends(corpora, work, wall);
    } catch (const std::exception& e) {
      error = e.what();
    }
    auto with_error = [&](Verdict v) {
      if (!error.empty()) v.check(false, "exception: " + error);
      return v;
    };
    guarded(6, "rectifier ordering on desk-scale corpora", [&] { return with_error(criterion_trend(runs, wall)); });
    guarded(7, "exponent count sweep", [&] { return with_error(criterion_ksweep(runs)); });
  }
  guarded(8, "random initialization", [&] { return criterion_random_init(corpora); });
  guarded(9, "determinism and persistence", [&] { return criterion_determinism(corpora, work); });
  if (wanted(10)) {
    Verdict v;
    try {
      v = check_label_preservation(work);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    emit(std::string("release check ") + (v.pass ? "PASS" : "FAIL") + "  label preservation", v);
  }

  if (work_arg.empty()) fs::remove_all(work);
  const std::string verdict = all ? "ALL PASS" : "SOME CRITERIA FAILED";
  std::cout << verdict << "\n";
  if (!report_path.empty()) std::ofstream(report_path) << text.str() << verdict << "\n";
  return all ? 0 : 1;
}
