// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "spinrect/harness.hpp"

namespace spinrect::harness {
namespace {

constexpr std::string_view kMagic = "spinrect-checkpoint v1";

std::string shape_text(const Shape& s) {
  if (s.empty()) return "scalar";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(s[i]);
  }
  return out;
}

Shape parse_shape(const std::string& text) {
  if (text == "scalar") return {};
  Shape s;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('x', pos);
    const std::string part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    std::size_t v = 0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), v);
    if (r.ec != std::errc() || r.ptr != part.data() + part.size() || part.empty()) {
      throw std::runtime_error("checkpoint: bad shape '" + text + "'");
    }
    s.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return s;
}

[[noreturn]] void corrupt(const std::string& what) { throw std::runtime_error("checkpoint: " + what); }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  std::ostringstream h;
  std::size_t config_lines = 0;
  for (char ch : c.config_text) config_lines += ch == '\n';
  if (!c.config_text.empty() && c.config_text.back() != '\n') {
    throw std::invalid_argument("checkpoint: config text must end with a newline");
  }
  h << kMagic << '\n' << "config " << config_lines << '\n' << c.config_text;
  h << "step " << c.step << '\n' << "tensors " << c.tensors.size() << '\n';
  std::size_t offset = 0;
  for (const auto& [name, t] : c.tensors) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw std::invalid_argument("checkpoint: invalid tensor name '" + name + "'");
    }
    h << name << ' ' << shape_text(t.shape()) << ' ' << offset << '\n';
    offset += t.numel() * sizeof(double);
  }
  h << "end\n";
  const std::string header = h.str();
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + offset);
  for (const auto& [name, t] : c.tensors) {
    for (double v : t.data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto line = [&]() {
    const auto begin = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) corrupt("truncated header");
    std::string s(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos));
    ++pos;
    return s;
  };
  auto keyed = [&](const std::string& key) -> std::uint64_t {
    const std::string s = line();
    if (s.rfind(key + " ", 0) != 0) corrupt("expected '" + key + "', got '" + s + "'");
    std::uint64_t v = 0;
    const char* b = s.data() + key.size() + 1;
    const auto r = std::from_chars(b, s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) corrupt("bad value in '" + s + "'");
    return v;
  };
  if (line() != kMagic) corrupt("bad magic");
  Checkpoint c;
  const auto config_lines = keyed("config");
  for (std::uint64_t i = 0; i < config_lines; ++i) c.config_text += line() + "\n";
  c.step = keyed("step");
  const auto count = keyed("tensors");
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  std::size_t expected = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::istringstream in(line());
    Entry e;
    std::string shape;
    if (!(in >> e.name >> shape >> e.offset)) corrupt("bad tensor entry");
    e.shape = parse_shape(shape);
    if (e.offset != expected) corrupt("offset mismatch for " + e.name);
    expected += shape_numel(e.shape) * sizeof(double);
    entries.push_back(std::move(e));
  }
  if (line() != "end") corrupt("missing end marker");
  if (bytes.size() - pos != expected) corrupt("payload size mismatch");
  for (const auto& e : entries) {
    const std::size_t n = shape_numel(e.shape);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      const std::size_t at = pos + e.offset + i * 8;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[at + b]) << (8 * b);
      values[i] = std::bit_cast<double>(bits);
    }
    c.tensors.emplace_back(e.name, Tensor::from(e.shape, std::move(values)));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint make_checkpoint(const TrainConfig& config, const Pipeline& pipeline,
                           const AdaDelta* optimizer, std::uint64_t step) {
  Checkpoint c;
  c.config_text = config.to_text();
  c.step = step;
  for (const auto& [name, p] : pipeline.params().entries()) c.tensors.emplace_back(name, p.detach());
  if (optimizer) {
    for (auto& e : optimizer->state()) c.tensors.push_back(std::move(e));
  }
  return c;
}

void restore(const Checkpoint& c, Pipeline& pipeline, AdaDelta* optimizer) {
  std::map<std::string, Tensor> by_name;
  for (const auto& [name, t] : c.tensors) by_name.emplace(name, t);
  for (const auto& [name, p] : pipeline.params().entries()) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ShapeError("checkpoint lacks parameter " + name);
    if (it->second.shape() != p.shape()) {
      throw ShapeError("checkpoint parameter " + name + " has shape " + shape_str(it->second.shape()) +
                       ", model expects " + shape_str(p.shape()));
    }
  }
  for (const auto& [name, p] : pipeline.params().entries()) {
    Tensor dst = p;
    const auto src = by_name.at(name).data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
  }
  if (optimizer) optimizer->load_state(by_name);
}

}  // namespace spinrect::harness
