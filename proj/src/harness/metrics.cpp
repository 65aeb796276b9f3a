// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spinrect/harness.hpp"

namespace spinrect::harness {
namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_num(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("metrics: bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void MetricsLog::append(MetricsRow row) {
  if (!rows_.empty() && row.step < rows_.back().step) {
    throw std::logic_error("MetricsLog: step " + std::to_string(row.step) + " after step " +
                           std::to_string(rows_.back().step));
  }
  rows_.push_back(std::move(row));
}

std::string MetricsLog::to_csv(bool with_wall) const {
  std::string out(kHeader);
  out += '\n';
  for (const auto& r : rows_) {
    std::string cls, acc;
    for (const auto& [name, value] : r.classes) {
      if (!cls.empty()) {
        cls += '|';
        acc += '|';
      }
      cls += name;
      acc += num(value);
    }
    out += std::to_string(r.step) + ',' + r.split + ',' + num(r.loss) + ',' +
           (r.seq_acc ? num(*r.seq_acc) : "") + ',' + cls + ',' + acc + ',' +
           (with_wall ? num(r.wall_ms) : "") + '\n';
  }
  return out;
}

void MetricsLog::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << to_csv();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

MetricsLog MetricsLog::parse(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::invalid_argument("metrics: bad header");
  MetricsLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw std::invalid_argument("metrics: expected 7 columns in '" + line + "'");
    MetricsRow r;
    r.step = static_cast<std::size_t>(parse_num(f[0]));
    r.split = f[1];
    r.loss = parse_num(f[2]);
    if (!f[3].empty()) r.seq_acc = parse_num(f[3]);
    if (!f[4].empty()) {
      const auto names = split(f[4], '|');
      const auto values = split(f[5], '|');
      if (names.size() != values.size()) throw std::invalid_argument("metrics: class/acc mismatch");
      for (std::size_t i = 0; i < names.size(); ++i) r.classes.emplace_back(names[i], parse_num(values[i]));
    }
    if (!f[6].empty()) r.wall_ms = parse_num(f[6]);
    log.append(std::move(r));
  }
  return log;
}

bool MetricsLog::same_metrics(const MetricsLog& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& a = rows_[i];
    const auto& b = other.rows_[i];
    if (a.step != b.step || a.split != b.split || a.loss != b.loss || a.seq_acc != b.seq_acc ||
        a.classes != b.classes) {
      return false;
    }
  }
  return true;
}

}  // namespace spinrect::harness
