// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spinrect/harness.hpp"
#include "spinrect/random.hpp"

namespace spinrect::harness {
namespace {

std::vector<synth::CorpusEntry> load_limited(const std::string& dir, std::size_t limit) {
  if (dir.empty()) return {};
  auto entries = synth::load_corpus(dir);
  if (limit != 0 && entries.size() > limit) entries.resize(limit);
  return entries;
}

void check_sizes(const Pipeline& p, const std::vector<synth::CorpusEntry>& corpus, const char* what) {
  for (const auto& e : corpus) {
    if (e.image.width != p.input_width() || e.image.height != p.input_height()) {
      throw ShapeError(std::string(what) + " corpus image " + e.filename + " is " +
                       std::to_string(e.image.width) + "x" + std::to_string(e.image.height) +
                       ", model expects " + std::to_string(p.input_width()) + "x" +
                       std::to_string(p.input_height()));
    }
  }
}

// Zeroes the gradients of everything outside the recognizer.
void freeze_rectifier(nn::ParamSet& params) {
  for (const auto& [name, p] : params.entries()) {
    if (name.rfind("rec.", 0) == 0 || !p.has_grad()) continue;
    Tensor t = p;
    for (double& g : t.mutable_grad()) g = 0.0;
  }
}

MetricsRow eval_row(std::uint64_t step, const EvalResult& r, double wall_ms) {
  MetricsRow row;
  row.step = step;
  row.split = "test";
  row.loss = r.loss;
  row.seq_acc = r.seq_acc;
  for (const auto& [cls, counts] : r.per_class) {
    row.classes.emplace_back(cls, counts.second ? static_cast<double>(counts.first) / counts.second : 0.0);
  }
  row.wall_ms = wall_ms;
  return row;
}

}  // namespace

EvalResult evaluate(const Pipeline& pipeline, const std::vector<synth::CorpusEntry>& corpus,
                    std::size_t batch_size) {
  EvalResult r;
  if (corpus.empty()) return r;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < corpus.size(); begin += batch_size) {
    const std::size_t end = std::min(corpus.size(), begin + batch_size);
    std::vector<std::size_t> idx;
    std::vector<std::string> labels;
    for (std::size_t i = begin; i < end; ++i) {
      idx.push_back(i);
      labels.push_back(corpus[i].label);
    }
    const Tensor x = synth::to_batch(corpus, idx);
    const Tensor rectified = pipeline.rectify(x);
    loss_sum += pipeline.recognizer().loss(rectified, labels).item() * static_cast<double>(idx.size());
    const auto predicted = pipeline.recognizer().recognize(rectified);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const bool ok = predicted[j] == labels[j];
      correct += ok;
      for (const auto& cls : corpus[idx[j]].classes) {
        auto& c = r.per_class[cls];
        c.first += ok;
        c.second += 1;
      }
    }
  }
  r.correct = correct;
  r.total = corpus.size();
  r.loss = loss_sum / static_cast<double>(corpus.size());
  r.seq_acc = static_cast<double>(correct) / static_cast<double>(corpus.size());
  return r;
}

TrainData load_train_data(const TrainConfig& config) {
  TrainData d;
  if (config.train_corpus.empty()) throw std::invalid_argument("train: no training corpus given");
  d.train = load_limited(config.train_corpus, config.train_limit);
  d.test = load_limited(config.test_corpus, config.test_limit);
  return d;
}

TrainResult train(const TrainConfig& config) { return train(config, load_train_data(config)); }

TrainResult train(const TrainConfig& config, const TrainData& data) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto wall = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  Pipeline pipeline(config.mode, config.k, config.preset);
  pipeline.init(config.init, config.seed);
  check_sizes(pipeline, data.train, "train");
  check_sizes(pipeline, data.test, "test");
  AdaDelta optimizer(pipeline.params(), config.rho, config.eps, config.clip);
  for (const auto& [name, p] : pipeline.params().entries()) {
    if (name.rfind("rec.", 0) != 0) optimizer.set_lr_scale(name, config.rectifier_lr_scale);
  }

  TrainResult result;
  bool evaluated = false;
  const std::size_t n = data.train.size();
  bool stop = config.max_steps != 0 && result.steps >= config.max_steps;
  for (std::size_t epoch = 1; epoch <= config.epochs && !stop && n > 0; ++epoch) {
    const double lr = config.lr_at_epoch(epoch);
    const auto order = Rng(derive_seed(config.seed, 1000 + epoch)).permutation(n);
    for (std::size_t begin = 0; begin < n && !stop; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<std::string> labels;
      for (std::size_t i : idx) labels.push_back(data.train[i].label);
      const Tensor x = synth::to_batch(data.train, idx);

      double loss_value = 0.0;
      {
        Tape tape;
        TapeScope scope(tape);
        pipeline.set_training(true);
        const Tensor loss = pipeline.loss(x, labels);
        pipeline.set_training(false);
        loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
          std::ostringstream dump;
          dump << "non-finite loss " << loss_value << " at step " << result.steps + 1 << " (epoch "
               << epoch << ", mode " << name(config.mode) << ", seed " << config.seed
               << "); last batch:\n";
          for (std::size_t i : idx) {
            const auto& e = data.train[i];
            dump << "  " << e.filename << '\t' << e.label << '\t' << e.meta << '\n';
          }
          if (!config.out_dir.empty()) {
            std::filesystem::create_directories(config.out_dir);
            std::ofstream(std::filesystem::path(config.out_dir) / "last_batch.txt") << dump.str();
          }
          throw std::runtime_error(dump.str());
        }
        tape.backward(loss);
      }
      if (result.steps < config.rectifier_warmup) freeze_rectifier(pipeline.params());
      optimizer.step(pipeline.params(), lr);
      pipeline.params().zero_grad();
      ++result.steps;
      result.step_losses.push_back(loss_value);
      if (result.steps % config.log_every == 0) {
        MetricsRow row;
        row.step = result.steps;
        row.split = "train";
        row.loss = loss_value;
        row.classes = {{"lr", lr}};
        row.wall_ms = wall();
        result.log.append(std::move(row));
      }
      stop = config.max_steps != 0 && result.steps >= config.max_steps;
    }
    if (!data.test.empty()) {
      result.final_eval = evaluate(pipeline, data.test, config.batch_size);
      result.log.append(eval_row(result.steps, result.final_eval, wall()));
      evaluated = true;
    }
    if (!config.out_dir.empty()) {
      std::filesystem::create_directories(config.out_dir);
      result.log.write(std::filesystem::path(config.out_dir) / "metrics.csv");
    }
  }
  if (!evaluated && !data.test.empty()) {
    result.final_eval = evaluate(pipeline, data.test, config.batch_size);
    result.log.append(eval_row(result.steps, result.final_eval, wall()));
  }

  result.checkpoint = make_checkpoint(config, pipeline, &optimizer, result.steps);
  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    save_checkpoint(dir / "checkpoint.bin", result.checkpoint);
    result.log.write(dir / "metrics.csv");
  }
  return result;
}

}  // namespace spinrect::harness
