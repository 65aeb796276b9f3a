// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spinrect/random.hpp"
#include "spinrect/synth.hpp"

namespace spinrect::synth {
namespace {

constexpr std::array<std::pair<Mix, std::string_view>, 4> kMixNames = {{
    {Mix::clean, "clean"},
    {Mix::chromatic, "chromatic"},
    {Mix::geometric, "geometric"},
    {Mix::combined, "combined"},
}};

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + s + "'");
  }
  return v;
}

std::map<std::string, std::string> parse_meta(const std::string& meta) {
  std::map<std::string, std::string> kv;
  std::istringstream in(meta);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("meta token without '=': " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

template <typename Op, std::size_t N>
std::vector<Op> pick_subset(Rng& rng, const std::array<Op, N>& all) {
  std::vector<Op> out;
  for (Op op : all) {
    if (rng.coin()) out.push_back(op);
  }
  if (out.empty()) out.push_back(all[rng.index(N)]);
  return out;
}

constexpr std::array<Chromatic, 6> kAllChromatic = {
    Chromatic::gamma,       Chromatic::brightness_shift, Chromatic::contrast_collapse,
    Chromatic::shadow_ramp, Chromatic::additive_noise,   Chromatic::pattern_coherence};
constexpr std::array<Geometric, 3> kAllGeometric = {Geometric::rotation, Geometric::perspective,
                                                     Geometric::curvature};

std::string key(const std::map<std::string, std::string>& kv, const std::string& k) {
  const auto it = kv.find(k);
  if (it == kv.end()) throw std::invalid_argument("meta lacks '" + k + "'");
  return it->second;
}

std::vector<std::string> classes_from_meta(const std::string& meta) {
  const auto kv = parse_meta(meta);
  std::vector<std::string> out;
  for (const char* k : {"chromatic", "geometric"}) {
    const std::string v = key(kv, k);
    if (v == "-") continue;
    for (auto& s : split(v, ',')) out.push_back(s);
  }
  if (out.empty()) out.push_back("clean");
  return out;
}

}  // namespace

std::string_view name(Mix mix) {
  for (const auto& [k, v] : kMixNames) {
    if (k == mix) return v;
  }
  return "?";
}

Mix parse_mix(std::string_view s) {
  for (const auto& [k, v] : kMixNames) {
    if (v == s) return k;
  }
  throw std::invalid_argument("unknown mix '" + std::string(s) +
                              "' (expected clean, chromatic, geometric or combined)");
}

std::string Sample::meta() const {
  auto join = [](const auto& ops) {
    if (ops.empty()) return std::string("-");
    std::string s;
    for (const auto& op : ops) {
      if (!s.empty()) s += ',';
      s += name(op);
    }
    return s;
  };
  return "severity=" + format_double(spec.severity) + " seed=" + std::to_string(spec.seed) +
         " chromatic=" + join(spec.chromatic) + " geometric=" + join(spec.geometric) +
         " canvas=" + std::to_string(width) + "x" + std::to_string(height);
}

std::vector<std::string> Sample::classes() const { return classes_from_meta(meta()); }

Image synthesize(std::string_view label, const DistortionSpec& spec, std::size_t width,
                 std::size_t height) {
  return apply_chromatic(apply_geometric(render_text(label, width, height), spec), spec);
}

Sample generate_sample(const CorpusSpec& spec, std::size_t index) {
  if (spec.min_label == 0 || spec.max_label < spec.min_label) {
    throw std::invalid_argument("corpus: invalid label length range");
  }
  const std::uint64_t seed = derive_seed(spec.seed, index);
  Rng rng(seed);
  Sample s;
  s.width = spec.width;
  s.height = spec.height;
  const std::size_t length = spec.min_label + rng.index(spec.max_label - spec.min_label + 1);
  for (std::size_t i = 0; i < length; ++i) s.label.push_back(static_cast<char>('0' + rng.index(10)));
  if (spec.mix != Mix::clean) {
    s.spec.severity = spec.severity;
    if (spec.mix == Mix::chromatic || spec.mix == Mix::combined) {
      s.spec.chromatic = pick_subset(rng, kAllChromatic);
    }
    if (spec.mix == Mix::geometric || spec.mix == Mix::combined) {
      s.spec.geometric = pick_subset(rng, kAllGeometric);
    }
  }
  s.spec.seed = derive_seed(seed, 0xD15);
  s.image = synthesize(s.label, s.spec, s.width, s.height);
  return s;
}

Sample replay(const std::string& label, const std::string& meta) {
  const auto kv = parse_meta(meta);
  Sample s;
  s.label = label;
  s.spec.severity = parse_double(key(kv, "severity"));
  s.spec.seed = parse_u64(key(kv, "seed"));
  if (const auto c = key(kv, "chromatic"); c != "-") {
    for (const auto& n : split(c, ',')) s.spec.chromatic.push_back(parse_chromatic(n));
  }
  if (const auto g = key(kv, "geometric"); g != "-") {
    for (const auto& n : split(g, ',')) s.spec.geometric.push_back(parse_geometric(n));
  }
  const auto canvas = split(key(kv, "canvas"), 'x');
  if (canvas.size() != 2) throw std::invalid_argument("bad canvas in meta");
  s.width = parse_u64(canvas[0]);
  s.height = parse_u64(canvas[1]);
  s.image = synthesize(s.label, s.spec, s.width, s.height);
  return s;
}

void build_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const auto manifest_path = dir / "manifest.tsv";
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot open " + manifest_path.string() + " for writing");
  for (std::size_t i = 0; i < spec.count; ++i) {
    const Sample s = generate_sample(spec, i);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.pgm", i);
    write_pgm(dir / name, s.image);
    manifest << name << '\t' << s.label << '\t' << s.meta() << '\n';
  }
  manifest.flush();
  if (!manifest) throw std::runtime_error("write failed: " + manifest_path.string());
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.tsv";
  std::ifstream manifest(manifest_path);
  if (!manifest) throw std::runtime_error("cannot open " + manifest_path.string());
  std::vector<CorpusEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(manifest, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw std::runtime_error(manifest_path.string() + ":" + std::to_string(lineno) +
                               ": expected 3 tab-separated fields");
    }
    CorpusEntry e;
    e.filename = fields[0];
    e.label = fields[1];
    e.meta = fields[2];
    e.classes = classes_from_meta(e.meta);
    e.image = read_pgm(dir / e.filename);
    out.push_back(std::move(e));
  }
  return out;
}

Tensor to_tensor(const Image& image) {
  return Tensor::from({1, 1, image.height, image.width}, image.pixels);
}

Tensor to_batch(const std::vector<CorpusEntry>& entries, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("to_batch: no indices");
  const Image& first = entries.at(indices.front()).image;
  std::vector<double> data;
  data.reserve(indices.size() * first.pixels.size());
  for (std::size_t i : indices) {
    const Image& img = entries.at(i).image;
    if (img.width != first.width || img.height != first.height) {
      throw ShapeError("to_batch: mixed image sizes in corpus");
    }
    data.insert(data.end(), img.pixels.begin(), img.pixels.end());
  }
  return Tensor::from({indices.size(), 1, first.height, first.width}, std::move(data));
}

Image from_tensor(const Tensor& t, std::size_t index) {
  if (t.rank() != 4 || t.dim(1) != 1 || index >= t.dim(0)) {
    throw ShapeError("from_tensor: expected (batch, 1, h, w), got " + shape_str(t.shape()));
  }
  Image img(t.dim(3), t.dim(2));
  const auto d = t.data();
  const std::size_t n = img.pixels.size();
  std::copy(d.begin() + static_cast<std::ptrdiff_t>(index * n),
            d.begin() + static_cast<std::ptrdiff_t>((index + 1) * n), img.pixels.begin());
  return img;
}

}  // namespace spinrect::synth
