// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <mutex>
#include <thread>

#include "spinrect/harness.hpp"

namespace spinrect::harness {
namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<AblationRun> ablate(const AblationSpec& spec) {
  const std::vector<std::size_t> ks = spec.ks.empty() ? std::vector<std::size_t>{spec.base.k} : spec.ks;

  std::map<std::string, TrainData> data;
  for (const auto& c : spec.corpora) {
    TrainConfig cfg = spec.base;
    cfg.train_corpus = c.train_dir;
    cfg.test_corpus = c.test_dir;
    data.emplace(c.name, load_train_data(cfg));
  }

  std::vector<AblationRun> runs;
  for (const auto& c : spec.corpora) {
    for (Mode m : spec.modes) {
      for (std::size_t k : ks) {
        for (std::uint64_t s : spec.seeds) {
          AblationRun r;
          r.mode = m;
          r.k = k;
          r.corpus = c.name;
          r.seed = s;
          runs.push_back(r);
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      AblationRun& r = runs[i];
      TrainConfig cfg = spec.base;
      cfg.mode = r.mode;
      cfg.k = r.k;
      cfg.seed = r.seed;
      const auto it = std::find_if(spec.corpora.begin(), spec.corpora.end(),
                                   [&](const CorpusPair& c) { return c.name == r.corpus; });
      cfg.train_corpus = it->train_dir;
      cfg.test_corpus = it->test_dir;
      cfg.out_dir.clear();
      if (!spec.out_dir.empty()) {
        cfg.out_dir = (std::filesystem::path(spec.out_dir) / r.corpus /
                       (std::string(name(r.mode)) + "_k" + std::to_string(r.k) + "_s" +
                        std::to_string(r.seed)))
                          .string();
      }
      try {
        const TrainResult result = train(cfg, data.at(r.corpus));
        r.final_acc = result.final_eval.seq_acc;
        r.ok = true;
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
      if (spec.progress) {
        std::lock_guard lock(progress_mutex);
        spec.progress(std::string(name(r.mode)) + " k=" + std::to_string(r.k) + " " + r.corpus +
                      " seed=" + std::to_string(r.seed) + ": " +
                      (r.ok ? num(r.final_acc) : "failed (" + r.error + ")"));
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(spec.jobs, runs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return runs;
}

std::string ablation_csv(const std::vector<AblationRun>& runs) {
  std::string out = "mode,k,corpus,seed,final_acc\n";
  for (const auto& r : runs) {
    out += std::string(name(r.mode)) + ',' + std::to_string(r.k) + ',' + r.corpus + ',' +
           std::to_string(r.seed) + ',' + (r.ok ? num(r.final_acc) : "failed") + '\n';
  }
  return out;
}

std::string ablation_summary_csv(const std::vector<AblationRun>& runs) {
  std::string out = "mode,k,corpus,runs,mean,min,max\n";
  std::vector<std::tuple<Mode, std::size_t, std::string>> groups;
  for (const auto& r : runs) {
    const auto key = std::make_tuple(r.mode, r.k, r.corpus);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [mode, k, corpus] : groups) {
    std::vector<double> acc;
    for (const auto& r : runs) {
      if (r.ok && r.mode == mode && r.k == k && r.corpus == corpus) acc.push_back(r.final_acc);
    }
    out += std::string(name(mode)) + ',' + std::to_string(k) + ',' + corpus + ',' +
           std::to_string(acc.size()) + ',';
    if (acc.empty()) {
      out += ",,\n";
      continue;
    }
    double sum = 0.0;
    for (double a : acc) sum += a;
    out += num(sum / static_cast<double>(acc.size())) + ',' +
           num(*std::min_element(acc.begin(), acc.end())) + ',' +
           num(*std::max_element(acc.begin(), acc.end())) + '\n';
  }
  return out;
}

std::optional<double> mean_accuracy(const std::vector<AblationRun>& runs, Mode mode, std::size_t k,
                                    const std::string& corpus) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.ok && r.mode == mode && r.k == k && r.corpus == corpus) {
      sum += r.final_acc;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace spinrect::harness
