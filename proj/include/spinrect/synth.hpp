// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic text images: 5x7 bitmap digits rendered onto a
// grayscale canvas, then geometric and chromatic distortions. Every random
// choice of a sample flows from a seed derived from (corpus seed, index).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spinrect/tensor.hpp"

namespace spinrect::synth {

inline constexpr double kForeground = 0.9;
inline constexpr double kBackground = 0.1;
inline constexpr std::size_t kGlyphRows = 7;
inline constexpr std::size_t kGlyphCols = 5;

/// Row bitmaps, bit 4 is the leftmost column.
using Glyph = std::array<std::uint8_t, kGlyphRows>;

/// Throws std::invalid_argument for characters without a glyph.
const Glyph& glyph(char c);
bool has_glyph(char c);

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // row-major

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}
  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  bool operator==(const Image&) const = default;
};

/// Placement of rendered glyphs on a canvas.
struct TextLayout {
  std::size_t glyph_height = 0;
  std::size_t glyph_width = 0;
  std::size_t advance = 0;  // glyph_width + 1 column gap
  std::size_t left = 0;
  std::size_t top = 0;
};

/// Glyph height is round(0.7 * height); width keeps the 5:7 aspect unless
/// the label needs narrower glyphs to fit. Throws std::invalid_argument when
/// glyphs would have to be narrower than 5 columns, or the label is empty.
TextLayout layout_text(std::size_t length, std::size_t width, std::size_t height);

Image render_text(std::string_view label, std::size_t width, std::size_t height);

enum class Chromatic { gamma, brightness_shift, contrast_collapse, shadow_ramp, additive_noise, pattern_coherence };
enum class Geometric { rotation, perspective, curvature };

std::string_view name(Chromatic op);
std::string_view name(Geometric op);
Chromatic parse_chromatic(std::string_view s);
Geometric parse_geometric(std::string_view s);

struct DistortionSpec {
  std::vector<Chromatic> chromatic;
  std::vector<Geometric> geometric;
  double severity = 0.0;
  std::uint64_t seed = 0;
};

/// Chromatic operators in a fixed order (pattern coherence first), each
/// clamped to [0, 1]. Severity 0 returns the input unchanged.
Image apply_chromatic(const Image& image, const DistortionSpec& spec);

/// All selected geometric operators composed into one inverse map and
/// resampled once (bilinear, zero padding).
Image apply_geometric(const Image& image, const DistortionSpec& spec);

/// Rotation about the image centre by `degrees`, bilinear with zero padding.
Image rotate(const Image& image, double degrees);

/// Bilinear sample at (row, col); outside neighbours count as zero.
double sample_bilinear(const Image& image, double row, double col);

enum class Mix { clean, chromatic, geometric, combined };
std::string_view name(Mix mix);
Mix parse_mix(std::string_view s);

struct CorpusSpec {
  std::size_t count = 0;
  Mix mix = Mix::clean;
  double severity = 1.0;
  std::uint64_t seed = 0;
  std::size_t width = 48;
  std::size_t height = 16;
  std::size_t min_label = 1;
  std::size_t max_label = 8;
};

struct Sample {
  std::string label;
  DistortionSpec spec;
  std::size_t width = 0, height = 0;
  Image image;

  /// `key=value` pairs separated by spaces.
  std::string meta() const;
  /// Distortion tags of the sample ("clean" when it has none).
  std::vector<std::string> classes() const;
};

/// Render then distort: geometric first, chromatic second.
Image synthesize(std::string_view label, const DistortionSpec& spec, std::size_t width,
                 std::size_t height);

Sample generate_sample(const CorpusSpec& spec, std::size_t index);

/// Rebuilds a sample from its label and meta string.
Sample replay(const std::string& label, const std::string& meta);

/// Writes <dir>/NNNNNN.pgm files and <dir>/manifest.tsv. Throws
/// std::runtime_error naming the path on I/O failure.
void build_corpus(const std::filesystem::path& dir, const CorpusSpec& spec);

struct CorpusEntry {
  std::string filename;
  std::string label;
  std::string meta;
  std::vector<std::string> classes;
  Image image;
};

/// Reads a corpus in manifest order.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

/// (batch, 1, height, width) tensor of the selected entries.
Tensor to_batch(const std::vector<CorpusEntry>& entries, const std::vector<std::size_t>& indices);
Tensor to_tensor(const Image& image);
Image from_tensor(const Tensor& t, std::size_t index = 0);

// Binary PGM, maxval 255, value round(255 * x).
std::vector<std::uint8_t> encode_pgm(const Image& image);
Image decode_pgm(const std::vector<std::uint8_t>& bytes);
void write_pgm(const std::filesystem::path& path, const Image& image);
Image read_pgm(const std::filesystem::path& path);
/// round(255 * x) / 255, the value a pixel has after a PGM round trip.
Image quantize(const Image& image);

}  // namespace spinrect::synth
