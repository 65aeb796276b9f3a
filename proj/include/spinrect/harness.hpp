// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training harness: rectifier + recognizer pipelines, the AdaDelta
// optimizer, checkpoints, metrics logs, the training loop and the ablation
// driver.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinrect/nn.hpp"
#include "spinrect/recognizer.hpp"
#include "spinrect/spin.hpp"
#include "spinrect/synth.hpp"
#include "spinrect/tensor.hpp"
#include "spinrect/tps.hpp"

namespace spinrect::harness {

enum class Mode { none, spin_no_ain, spin, stn, spin_stn, ga_spin };

/// "none", "spin-no-ain", "spin", "stn", "spin+stn", "ga-spin".
std::string_view name(Mode mode);
Mode parse_mode(std::string_view s);
spin::Preset parse_preset(std::string_view s);
std::string_view name(spin::Preset preset);
spin::InitScheme parse_init(std::string_view s);
std::string_view name(spin::InitScheme scheme);

// ---------------------------------------------------------------------------
// Configuration

struct TrainConfig {
  Mode mode = Mode::spin;
  std::size_t k = 6;
  spin::Preset preset = spin::Preset::toy;
  spin::InitScheme init = spin::InitScheme::paper_scheme;
  std::string train_corpus;
  std::string test_corpus;
  std::size_t epochs = 3;
  std::size_t batch_size = 16;
  double lr = 1.0;
  /// 1-based epochs from which the learning rate is divided by a further 10.
  std::vector<std::size_t> lr_decay_epochs{2, 3};
  double clip = 5.0;
  double rho = 0.95;
  double eps = 1e-6;
  std::uint64_t seed = 1;
  /// Stop after this many optimizer steps (0 = no limit).
  std::size_t max_steps = 0;
  /// Use only the first N samples of a corpus (0 = all).
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
  /// A train row is logged every `log_every` steps.
  std::size_t log_every = 50;
  /// Optimizer steps during which only recognizer parameters ("rec."
  /// prefix) are updated; the rectifier stays at its initialization.
  std::size_t rectifier_warmup = 0;
  /// Learning-rate multiplier for every non-recognizer parameter.
  double rectifier_lr_scale = 1.0;
  std::string out_dir;

  /// Learning rate in effect during 1-based `epoch`.
  double lr_at_epoch(std::size_t epoch) const;

  /// Sets one key from its text form; throws std::invalid_argument for
  /// unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& keys();
  std::string get(const std::string& key) const;

  /// `key = value` lines in keys() order.
  std::string to_text() const;
  static TrainConfig from_text(const std::string& text);
};

/// Throws std::runtime_error if the file cannot be read.
TrainConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Model

/// Rectifier (chosen by mode) followed by the recognizer, sharing one
/// parameter set. Not copyable: the modules hold handles into params().
class Pipeline {
 public:
  Pipeline(Mode mode, std::size_t k, spin::Preset preset);
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  Tensor rectify(const Tensor& x) const;
  Tensor loss(const Tensor& x, const std::vector<std::string>& labels) const;
  std::vector<std::string> recognize(const Tensor& x) const;

  /// Rectifier init per `scheme` (the STN stage always starts at the
  /// identity warp); recognizer gets its own derived seed.
  void init(spin::InitScheme scheme, std::uint64_t seed);

  /// Named intermediate images of the rectifier for inspection.
  std::vector<std::pair<std::string, Tensor>> intermediates(const Tensor& x) const;

  Mode mode() const { return mode_; }
  std::size_t input_width() const { return width_; }
  std::size_t input_height() const { return height_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }
  const spin::SpinModule* spin() const { return spin_.get(); }
  const tps::StnModule* stn() const { return stn_.get(); }
  const tps::GaSpin* ga_spin() const { return ga_.get(); }
  const rec::Recognizer& recognizer() const { return *rec_; }
  /// Switches the recognizer between batch and running normalization.
  void set_training(bool on) { rec_->set_training(on); }

 private:
  Mode mode_;
  std::size_t width_, height_;
  nn::ParamSet params_;
  std::unique_ptr<spin::SpinModule> spin_;
  std::unique_ptr<tps::StnModule> stn_;
  std::unique_ptr<tps::GaSpin> ga_;
  std::unique_ptr<rec::Recognizer> rec_;
};

spin::SpinConfig rectifier_config(spin::Preset preset, std::size_t k);
rec::RecognizerConfig recognizer_config(spin::Preset preset);

// ---------------------------------------------------------------------------
// Optimizer

/// Scales every gradient so the global L2 norm is at most `max_norm`.
/// Returns the norm before clipping. Parameters without a gradient count
/// as zero.
double clip_grad_norm(nn::ParamSet& params, double max_norm);

class AdaDelta {
 public:
  AdaDelta(const nn::ParamSet& params, double rho = 0.95, double eps = 1e-6, double clip = 5.0);

  /// Checks gradients are finite (std::runtime_error naming the parameter
  /// otherwise), clips, then applies one update scaled by `lr`.
  void step(nn::ParamSet& params, double lr);

  /// Multiplies the learning rate of one parameter (default 1). Throws
  /// std::invalid_argument for an unknown name.
  void set_lr_scale(const std::string& name, double scale);

  /// Accumulators as named tensors: "adadelta.sq.<param>" and
  /// "adadelta.acc.<param>", in parameter order.
  std::vector<std::pair<std::string, Tensor>> state() const;
  /// Restores accumulators from tensors named as in state().
  void load_state(const std::map<std::string, Tensor>& tensors);

  double rho() const { return rho_; }
  double eps() const { return eps_; }
  double clip() const { return clip_; }

 private:
  double rho_, eps_, clip_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> sq_, acc_;
  std::vector<double> scale_;
};

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  std::string config_text;
  std::uint64_t step = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

/// Text header (magic line, config echo, step, one `name shape offset`
/// line per tensor, "end") then the tensors as little-endian float64.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const TrainConfig& config, const Pipeline& pipeline,
                           const AdaDelta* optimizer, std::uint64_t step);
/// Copies parameter (and optimizer) values in. Throws ShapeError on a
/// missing entry or shape mismatch.
void restore(const Checkpoint& c, Pipeline& pipeline, AdaDelta* optimizer);

// ---------------------------------------------------------------------------
// Metrics

struct MetricsRow {
  std::size_t step = 0;
  std::string split;  // "train" or "test"
  double loss = 0.0;
  std::optional<double> seq_acc;  // empty on train rows
  /// Train rows: {"lr", lr}. Eval rows: one entry per distortion class.
  std::vector<std::pair<std::string, double>> classes;
  double wall_ms = 0.0;
};

class MetricsLog {
 public:
  static constexpr std::string_view kHeader = "step,split,loss,seq_acc,class,acc,wall_ms";

  /// Throws std::logic_error if `row.step` is below the last row's.
  void append(MetricsRow row);
  const std::vector<MetricsRow>& rows() const { return rows_; }

  /// Class names and accuracies of one row are joined with '|'.
  std::string to_csv(bool with_wall = true) const;
  void write(const std::filesystem::path& path) const;
  static MetricsLog parse(const std::string& csv);

  /// Equality of every column except wall time.
  bool same_metrics(const MetricsLog& other) const;

 private:
  std::vector<MetricsRow> rows_;
};

// ---------------------------------------------------------------------------
// Training and evaluation

struct EvalResult {
  double loss = 0.0;
  double seq_acc = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
};

EvalResult evaluate(const Pipeline& pipeline, const std::vector<synth::CorpusEntry>& corpus,
                    std::size_t batch_size);

struct TrainResult {
  MetricsLog log;
  std::uint64_t steps = 0;
  EvalResult final_eval;
  std::vector<double> step_losses;
  Checkpoint checkpoint;
};

struct TrainData {
  std::vector<synth::CorpusEntry> train;
  std::vector<synth::CorpusEntry> test;
};

TrainData load_train_data(const TrainConfig& config);

/// Runs training. When out_dir is set, writes checkpoint.bin and
/// metrics.csv there (metrics.csv is refreshed after every epoch). A non-finite loss aborts with std::runtime_error
/// listing the batch's samples (also written to last_batch.txt).
TrainResult train(const TrainConfig& config, const TrainData& data);
TrainResult train(const TrainConfig& config);

// ---------------------------------------------------------------------------
// Ablation

struct CorpusPair {
  std::string name;
  std::string train_dir;
  std::string test_dir;
};

struct AblationSpec {
  TrainConfig base;
  std::vector<Mode> modes;
  std::vector<std::size_t> ks;  // empty: base.k
  std::vector<std::uint64_t> seeds;
  std::vector<CorpusPair> corpora;
  std::size_t jobs = 1;
  /// Runs write into <out_dir>/<corpus>/<mode>_k<k>_s<seed> when set.
  std::string out_dir;
  std::function<void(const std::string&)> progress;
};

struct AblationRun {
  Mode mode = Mode::none;
  std::size_t k = 0;
  std::string corpus;
  std::uint64_t seed = 0;
  bool ok = false;
  double final_acc = 0.0;
  std::string error;
};

std::vector<AblationRun> ablate(const AblationSpec& spec);

/// Header mode,k,corpus,seed,final_acc; one row per run, failed runs carry
/// "failed" as accuracy.
std::string ablation_csv(const std::vector<AblationRun>& runs);
/// Header mode,k,corpus,runs,mean,min,max over successful runs.
std::string ablation_summary_csv(const std::vector<AblationRun>& runs);
/// Mean accuracy of successful runs matching (mode, k, corpus).
std::optional<double> mean_accuracy(const std::vector<AblationRun>& runs, Mode mode, std::size_t k,
                                    const std::string& corpus);

}  // namespace spinrect::harness
