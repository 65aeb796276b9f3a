// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spinrect/harness.hpp"

namespace spinrect::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("config: bad value '" + v + "' for " + key);
  }
  return out;
}

std::string format(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

double TrainConfig::lr_at_epoch(std::size_t epoch) const {
  int decays = 0;
  for (std::size_t e : lr_decay_epochs) decays += epoch >= e;
  // Division by an exact power of ten keeps 1.0 -> 0.1 -> 0.01 exact.
  return lr / std::pow(10.0, decays);
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = {
      "mode",       "k",          "preset",   "init",        "train",      "test",
      "epochs",     "batch_size", "lr",       "lr_decay_epochs", "clip",   "rho",
      "eps",        "seed",       "max_steps", "train_limit", "test_limit", "log_every",
      "rectifier_warmup", "rectifier_lr_scale", "out"};
  return k;
}

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "mode") mode = parse_mode(v);
  else if (key == "k") k = parse_number<std::size_t>(key, v);
  else if (key == "preset") preset = parse_preset(v);
  else if (key == "init") init = parse_init(v);
  else if (key == "train") train_corpus = v;
  else if (key == "test") test_corpus = v;
  else if (key == "epochs") epochs = parse_number<std::size_t>(key, v);
  else if (key == "batch_size") {
    batch_size = parse_number<std::size_t>(key, v);
    if (batch_size == 0) throw std::invalid_argument("config: batch_size must be positive");
  } else if (key == "lr") lr = parse_number<double>(key, v);
  else if (key == "lr_decay_epochs") {
    lr_decay_epochs.clear();
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) lr_decay_epochs.push_back(parse_number<std::size_t>(key, item));
    }
  } else if (key == "clip") clip = parse_number<double>(key, v);
  else if (key == "rho") rho = parse_number<double>(key, v);
  else if (key == "eps") eps = parse_number<double>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "max_steps") max_steps = parse_number<std::size_t>(key, v);
  else if (key == "train_limit") train_limit = parse_number<std::size_t>(key, v);
  else if (key == "test_limit") test_limit = parse_number<std::size_t>(key, v);
  else if (key == "log_every") {
    log_every = parse_number<std::size_t>(key, v);
    if (log_every == 0) throw std::invalid_argument("config: log_every must be positive");
  } else if (key == "rectifier_warmup") rectifier_warmup = parse_number<std::size_t>(key, v);
  else if (key == "rectifier_lr_scale") {
    rectifier_lr_scale = parse_number<double>(key, v);
    if (!(rectifier_lr_scale >= 0.0)) throw std::invalid_argument("config: rectifier_lr_scale must be >= 0");
  }  else if (key == "out") out_dir = v;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string TrainConfig::get(const std::string& key) const {
  if (key == "mode") return std::string(name(mode));
  if (key == "k") return std::to_string(k);
  if (key == "preset") return std::string(name(preset));
  if (key == "init") return std::string(name(init));
  if (key == "train") return train_corpus;
  if (key == "test") return test_corpus;
  if (key == "epochs") return std::to_string(epochs);
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "lr") return format(lr);
  if (key == "lr_decay_epochs") {
    std::string s;
    for (std::size_t e : lr_decay_epochs) s += (s.empty() ? "" : ",") + std::to_string(e);
    return s;
  }
  if (key == "clip") return format(clip);
  if (key == "rho") return format(rho);
  if (key == "eps") return format(eps);
  if (key == "seed") return std::to_string(seed);
  if (key == "max_steps") return std::to_string(max_steps);
  if (key == "train_limit") return std::to_string(train_limit);
  if (key == "test_limit") return std::to_string(test_limit);
  if (key == "log_every") return std::to_string(log_every);
  if (key == "rectifier_warmup") return std::to_string(rectifier_warmup);
  if (key == "rectifier_lr_scale") return format(rectifier_lr_scale);
  if (key == "out") return out_dir;
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return TrainConfig::from_text(ss.str());
}

}  // namespace spinrect::harness
