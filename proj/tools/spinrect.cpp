// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: corpus generation, training, evaluation,
// rectification, ablations, gradient checks and exponent banks.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "spinrect/gradsuite.hpp"
#include "spinrect/harness.hpp"
#include "spinrect/kernels.hpp"
#include "spinrect/spt.hpp"
#include "spinrect/synth.hpp"

namespace fs = std::filesystem;
using namespace spinrect;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Registers --<key> for every config key; values are applied after parsing.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    for (const auto& key : harness::TrainConfig::keys()) {
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      app->add_option(names, values[key], "override config key '" + key + "'");
    }
  }

  harness::TrainConfig resolve(CLI::App* app) const {
    harness::TrainConfig c = config_path.empty() ? harness::TrainConfig{} : harness::load_config(config_path);
    for (const auto& key : harness::TrainConfig::keys()) {
      if (app->get_option("--" + key)->count() > 0) c.set(key, values.at(key));
    }
    return c;
  }
};

harness::TrainConfig config_of(const harness::Checkpoint& c) {
  return harness::TrainConfig::from_text(c.config_text);
}

int cmd_gen_data(const std::string& out, const synth::CorpusSpec& spec) {
  synth::build_corpus(out, spec);
  std::cout << "wrote " << spec.count << " samples to " << out << "\n";
  return 0;
}

int cmd_train(const harness::TrainConfig& config) {
  const auto result = harness::train(config);
  std::cout << "steps," << result.steps << "\n";
  if (!config.test_corpus.empty()) std::cout << "seq_acc," << result.final_eval.seq_acc << "\n";
  if (!config.out_dir.empty()) {
    std::cout << "checkpoint," << (fs::path(config.out_dir) / "checkpoint.bin").string() << "\n";
    std::cout << "metrics," << (fs::path(config.out_dir) / "metrics.csv").string() << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& corpus, std::size_t batch,
             std::size_t limit) {
  const auto ckpt = harness::load_checkpoint(checkpoint);
  const auto config = config_of(ckpt);
  harness::Pipeline pipeline(config.mode, config.k, config.preset);
  harness::restore(ckpt, pipeline, nullptr);
  auto entries = synth::load_corpus(corpus);
  if (limit != 0 && entries.size() > limit) entries.resize(limit);
  const auto r = harness::evaluate(pipeline, entries, batch);
  std::cout << "class,correct,total,acc\n";
  std::cout << "all," << r.correct << "," << r.total << "," << r.seq_acc << "\n";
  for (const auto& [cls, counts] : r.per_class) {
    std::cout << cls << "," << counts.first << "," << counts.second << ","
              << (counts.second ? static_cast<double>(counts.first) / counts.second : 0.0) << "\n";
  }
  return 0;
}

int cmd_rectify(const std::string& input, const std::string& output, const std::string& mode_name,
                const std::string& checkpoint, std::size_t k, std::uint64_t seed,
                const std::string& dump_dir) {
  const synth::Image in = synth::read_pgm(input);
  harness::Mode mode = harness::parse_mode(mode_name);
  std::optional<harness::Checkpoint> ckpt;
  spin::Preset preset = spin::Preset::toy;
  if (!checkpoint.empty()) {
    ckpt = harness::load_checkpoint(checkpoint);
    const auto config = config_of(*ckpt);
    mode = config.mode;
    k = config.k;
    preset = config.preset;
  }
  if (mode == harness::Mode::none) {
    synth::write_pgm(output, in);
    return 0;
  }
  harness::Pipeline pipeline(mode, k, preset);
  if (ckpt) {
    harness::restore(*ckpt, pipeline, nullptr);
  } else {
    pipeline.init(spin::InitScheme::paper_scheme, seed);
  }
  const Tensor x = synth::to_tensor(in);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    for (const auto& [name, t] : pipeline.intermediates(x)) {
      const auto path = fs::path(dump_dir) / (name + ".pgm");
      synth::write_pgm(path, synth::from_tensor(t));
      std::cout << "intermediate," << path.string() << "\n";
    }
  }
  synth::write_pgm(output, synth::from_tensor(pipeline.rectify(x)));
  return 0;
}

int cmd_ablate(const harness::TrainConfig& base, const std::string& modes, const std::string& seeds,
               const std::string& ks, const std::vector<std::string>& corpora, const std::string& out,
               std::size_t jobs) {
  harness::AblationSpec spec;
  spec.base = base;
  for (const auto& m : split_list(modes)) spec.modes.push_back(harness::parse_mode(m));
  for (const auto& s : split_list(seeds)) spec.seeds.push_back(std::stoull(s));
  for (const auto& k : split_list(ks)) spec.ks.push_back(std::stoull(k));
  for (const auto& c : corpora) {
    const auto eq = c.find('=');
    const auto colon = c.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos) {
      throw std::invalid_argument("--corpus expects name=train_dir:test_dir, got '" + c + "'");
    }
    spec.corpora.push_back({c.substr(0, eq), c.substr(eq + 1, colon - eq - 1), c.substr(colon + 1)});
  }
  if (spec.modes.empty() || spec.seeds.empty() || spec.corpora.empty()) {
    throw std::invalid_argument("ablate needs --modes, --seeds and at least one --corpus");
  }
  spec.jobs = jobs;
  spec.out_dir = out;
  spec.progress = [](const std::string& line) { std::cerr << line << std::endl; };
  const auto runs = harness::ablate(spec);
  const std::string table = harness::ablation_csv(runs);
  const std::string summary = harness::ablation_summary_csv(runs);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "ablation.csv") << table;
    std::ofstream(fs::path(out) / "summary.csv") << summary;
  }
  std::cout << table << "\n" << summary;
  return 0;
}

int cmd_gradcheck(const std::string& filter) {
  std::printf("%-32s %12s %8s %8s %8s  %s\n", "case", "max_rel_err", "tol", "checked", "skipped", "result");
  bool ok = true;
  const auto results = run_grad_suite(filter, [&](const GradSuiteResult& r) {
    ok = ok && r.report.passed;
    std::printf("%-32s %12.3e %8.0e %8zu %8zu  %s\n", r.name.c_str(), r.report.max_rel_error,
                r.tolerance, r.report.checked, r.report.skipped, r.report.passed ? "PASS" : "FAIL");
    if (!r.report.passed) {
      std::printf("    worst coordinate %zu: analytic %.9e, numeric %.9e\n", r.report.worst_index,
                  r.report.analytic_at_worst, r.report.numeric_at_worst);
    }
    std::fflush(stdout);
  });
  if (results.empty()) {
    std::cerr << "no gradient case matches '" << filter << "'\n";
    return 1;
  }
  return ok ? 0 : 1;
}

int cmd_exponents(std::size_t k) {
  const auto bank = spt::ExponentBank::build(k);
  for (double b : bank.betas()) std::printf("%.2f\n", b);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinrect: chromatic and geometric rectification for text recognition"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  std::string gen_out;
  synth::CorpusSpec corpus;
  std::string mix = "clean";
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--count", corpus.count, "number of samples")->required();
  gen->add_option("--mix", mix, "clean, chromatic, geometric or combined");
  gen->add_option("--severity", corpus.severity, "distortion severity in [0, 1]")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", corpus.seed, "corpus seed");
  gen->add_option("--width", corpus.width, "canvas width");
  gen->add_option("--height", corpus.height, "canvas height");
  gen->add_option("--min-label", corpus.min_label, "shortest label");
  gen->add_option("--max-label", corpus.max_label, "longest label");

  auto* train = app.add_subcommand("train", "train a rectifier + recognizer");
  ConfigFlags train_flags;
  train_flags.attach(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  std::string eval_ckpt, eval_corpus;
  std::size_t eval_batch = 16, eval_limit = 0;
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--corpus", eval_corpus)->required();
  eval->add_option("--batch-size", eval_batch)->check(CLI::PositiveNumber);
  eval->add_option("--limit", eval_limit, "evaluate only the first N samples");

  auto* rectify = app.add_subcommand("rectify", "rectify one PGM image");
  std::string rect_in, rect_out, rect_mode = "spin", rect_ckpt, rect_dump;
  std::size_t rect_k = 6;
  std::uint64_t rect_seed = 1;
  rectify->add_option("--input", rect_in)->required();
  rectify->add_option("--output", rect_out)->required();
  rectify->add_option("--mode", rect_mode, "rectification mode (ignored with --checkpoint)");
  rectify->add_option("--checkpoint", rect_ckpt, "trained parameters; default is the initial model");
  rectify->add_option("--k", rect_k);
  rectify->add_option("--seed", rect_seed);
  rectify->add_option("--dump-intermediate", rect_dump, "directory for intermediate images");

  auto* ablate = app.add_subcommand("ablate", "train every (mode, k, seed) on shared corpora");
  ConfigFlags ablate_flags;
  ablate_flags.attach(ablate);
  std::string ab_modes, ab_seeds = "1", ab_ks, ab_out;
  std::vector<std::string> ab_corpora;
  std::size_t ab_jobs = 1;
  ablate->add_option("--modes", ab_modes, "comma-separated modes")->required();
  ablate->add_option("--seeds", ab_seeds, "comma-separated seeds");
  ablate->add_option("--ks", ab_ks, "comma-separated K values (default: config k)");
  ablate->add_option("--corpus", ab_corpora, "name=train_dir:test_dir (repeatable)")->required();
  ablate->add_option("--results", ab_out, "directory for ablation.csv, summary.csv and runs");
  ablate->add_option("--jobs", ab_jobs, "parallel runs")->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  std::string gc_filter;
  gradcheck->add_option("--filter", gc_filter, "run only cases containing this text");

  auto* exponents = app.add_subcommand("exponents", "print the exponent bank");
  std::size_t exp_k = 6;
  exponents->add_option("--k", exp_k)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) std::cerr << app.help() << "\n";
    return app.exit(e);
  }

  try {
    if (*gen) {
      corpus.mix = synth::parse_mix(mix);
      return cmd_gen_data(gen_out, corpus);
    }
    if (*train) return cmd_train(train_flags.resolve(train));
    if (*eval) return cmd_eval(eval_ckpt, eval_corpus, eval_batch, eval_limit);
    if (*rectify) return cmd_rectify(rect_in, rect_out, rect_mode, rect_ckpt, rect_k, rect_seed, rect_dump);
    if (*ablate) {
      return cmd_ablate(ablate_flags.resolve(ablate), ab_modes, ab_seeds, ab_ks, ab_corpora, ab_out, ab_jobs);
    }
    if (*gradcheck) return cmd_gradcheck(gc_filter);
    if (*exponents) return cmd_exponents(exp_k);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
