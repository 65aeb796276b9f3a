// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <iterator>

#include "spinrect/synth.hpp"
#include "test_util.hpp"

using namespace spinrect;
using namespace spinrect::synth;
using spinrect::testing::TempDir;

namespace {

// Number of destination indices in [0, dst) that nearest-neighbour scaling
// maps onto source index s of [0, src).
std::size_t multiplicity(std::size_t s, std::size_t src, std::size_t dst) {
  auto first = [&](std::size_t i) { return (i * dst + src - 1) / src; };  // ceil(i * dst / src)
  return first(s + 1) - first(s);
}

const std::vector<Chromatic> kAllChromatic = {Chromatic::gamma, Chromatic::brightness_shift,
                                              Chromatic::contrast_collapse, Chromatic::shadow_ramp,
                                              Chromatic::additive_noise, Chromatic::pattern_coherence};
const std::vector<Geometric> kAllGeometric = {Geometric::rotation, Geometric::perspective, Geometric::curvature};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rendering one digit lights exactly its scaled glyph pixels") {
  const Image img = render_text("0", 48, 16);
  const std::size_t gh = 11, gw = 8;  // 70% of 16 rows, 5:7 aspect
  std::size_t expect = 0;
  const Glyph& g = glyph('0');
  for (std::size_t r = 0; r < kGlyphRows; ++r) {
    for (std::size_t c = 0; c < kGlyphCols; ++c) {
      if ((g[r] >> (kGlyphCols - 1 - c)) & 1u) expect += multiplicity(r, kGlyphRows, gh) * multiplicity(c, kGlyphCols, gw);
    }
  }
  std::size_t fg = 0, bg = 0;
  for (double v : img.pixels) {
    fg += v == kForeground;
    bg += v == kBackground;
  }
  CHECK(fg == expect);
  CHECK(fg + bg == img.pixels.size());
  CHECK(render_text("0", 48, 16) == img);
}

TEST_CASE("rendering errors") {
  CHECK_THROWS_AS(render_text("", 48, 16), std::invalid_argument);
  CHECK_THROWS_AS(render_text("123456789", 48, 16), std::invalid_argument);
  CHECK_THROWS_AS(render_text("1a", 48, 16), std::invalid_argument);
  CHECK_NOTHROW(render_text("12345678", 48, 16));
}

TEST_CASE("chromatic operators") {
  const Image clean = render_text("4071", 48, 16);
  SUBCASE("contrast collapse at full severity") {
    const Image y = apply_chromatic(clean, {{Chromatic::contrast_collapse}, {}, 1.0, 3});
    for (std::size_t i = 0; i < y.pixels.size(); ++i) {
      const double expect = clean.pixels[i] == kForeground ? 0.58 : 0.42;
      CHECK(y.pixels[i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("pattern coherence paints foreground intensity off the glyphs") {
    const Image y = apply_chromatic(clean, {{Chromatic::pattern_coherence}, {}, 1.0, 4});
    std::size_t painted = 0;
    for (std::size_t i = 0; i < y.pixels.size(); ++i) painted += clean.pixels[i] == kBackground && y.pixels[i] == kForeground;
    CHECK(painted > 0);
  }
  SUBCASE("severity zero is the identity") {
    CHECK(apply_chromatic(clean, {kAllChromatic, {}, 0.0, 5}) == clean);
    CHECK(apply_geometric(clean, {{}, kAllGeometric, 0.0, 5}) == clean);
  }
  SUBCASE("outputs stay in [0, 1]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Image y = apply_chromatic(apply_geometric(clean, {{}, kAllGeometric, 1.0, seed}),
                                      {kAllChromatic, {}, 1.0, seed});
      for (double v : y.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("rotation") {
  const Image clean = render_text("2580", 48, 16);
  CHECK(rotate(clean, 0.0) == clean);
  // Round trip on smooth content, over pixels whose samples never reach the
  // zero padding.
  Image smooth(48, 16);
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 48; ++c) smooth.at(r, c) = 0.5 + 0.3 * std::sin(0.3 * c) * std::cos(0.4 * r);
  }
  const Image back = rotate(rotate(smooth, 10.0), -10.0);
  const Image reach = rotate(rotate(Image(48, 16, 1.0), 10.0), -10.0);
  double diff = 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < smooth.pixels.size(); ++i) {
    if (std::abs(reach.pixels[i] - 1.0) > 1e-12) continue;
    diff += std::abs(back.pixels[i] - smooth.pixels[i]);
    ++inside;
  }
  REQUIRE(inside > smooth.pixels.size() / 2);
  CHECK(diff / static_cast<double>(inside) < 0.02);
}

TEST_CASE("samples replay from their metadata") {
  for (Mix mix : {Mix::clean, Mix::chromatic, Mix::geometric, Mix::combined}) {
    const CorpusSpec spec{40, mix, 0.8, 17};
    for (std::size_t i = 0; i < spec.count; ++i) {
      CAPTURE(name(mix));
      CAPTURE(i);
      const Sample s = generate_sample(spec, i);
      CHECK(s.label.size() >= 1);
      CHECK(s.label.size() <= 8);
      CHECK(replay(s.label, s.meta()).image == s.image);
      CHECK(generate_sample(spec, i).image == s.image);
      if (mix == Mix::clean) {
        CHECK(s.spec.severity == 0.0);
        CHECK(s.classes() == std::vector<std::string>{"clean"});
      }
      if (mix == Mix::chromatic) CHECK(s.spec.geometric.empty());
      if (mix == Mix::geometric) CHECK(s.spec.chromatic.empty());
    }
  }
}

TEST_CASE("corpus on disk") {
  TempDir tmp("synth");
  SUBCASE("same arguments give byte-identical corpora") {
    const CorpusSpec spec{12, Mix::combined, 1.0, 99};
    build_corpus(tmp.path() / "a", spec);
    build_corpus(tmp.path() / "b", spec);
    for (const auto& entry : std::filesystem::directory_iterator(tmp.path() / "a")) {
      CHECK(slurp(entry.path()) == slurp(tmp.path() / "b" / entry.path().filename()));
    }
    const auto loaded = load_corpus(tmp.path() / "a");
    REQUIRE(loaded.size() == 12);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      CHECK(loaded[i].image == quantize(generate_sample(spec, i).image));
      CHECK(loaded[i].label == generate_sample(spec, i).label);
    }
    build_corpus(tmp.path() / "c", {12, Mix::combined, 1.0, 100});
    CHECK(slurp(tmp.path() / "a" / "manifest.tsv") != slurp(tmp.path() / "c" / "manifest.tsv"));
  }
  SUBCASE("empty corpus has a valid manifest") {
    build_corpus(tmp.path() / "empty", {0, Mix::chromatic, 1.0, 1});
    CHECK(std::filesystem::exists(tmp.path() / "empty" / "manifest.tsv"));
    CHECK(load_corpus(tmp.path() / "empty").empty());
  }
  SUBCASE("missing corpus names the path") {
    try {
      load_corpus(tmp.path() / "nowhere");
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
    }
  }
}

TEST_CASE("pgm round trip") {
  const Image img = apply_chromatic(render_text("31", 48, 16), {kAllChromatic, {}, 0.7, 8});
  const auto bytes = encode_pgm(img);
  CHECK(std::string(bytes.begin(), bytes.begin() + 2) == "P5");
  const Image back = decode_pgm(bytes);
  CHECK(back == quantize(img));
  CHECK(encode_pgm(back) == bytes);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255 + 1e-15);
  CHECK_THROWS(decode_pgm({'P', '2', '\n'}));
}
