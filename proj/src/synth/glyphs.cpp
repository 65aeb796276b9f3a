// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <string>

#include "spinrect/synth.hpp"

namespace spinrect::synth {
namespace {

// Public-domain 5x7 digit bitmaps.
constexpr std::array<Glyph, 10> kDigits = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
}};

}  // namespace

bool has_glyph(char c) { return c >= '0' && c <= '9'; }

const Glyph& glyph(char c) {
  if (!has_glyph(c)) throw std::invalid_argument(std::string("no glyph for character '") + c + "'");
  return kDigits[static_cast<std::size_t>(c - '0')];
}

TextLayout layout_text(std::size_t length, std::size_t width, std::size_t height) {
  if (length == 0) throw std::invalid_argument("render_text: empty label");
  TextLayout l;
  l.glyph_height = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(height)));
  if (l.glyph_height < kGlyphRows) {
    throw std::invalid_argument("render_text: canvas height " + std::to_string(height) +
                                " too small for 7-row glyphs");
  }
  const auto natural = static_cast<std::size_t>(
      std::lround(static_cast<double>(l.glyph_height) * kGlyphCols / kGlyphRows));
  const std::size_t fit = (width + 1) / length;
  l.glyph_width = std::min(natural, fit == 0 ? 0 : fit - 1);
  if (l.glyph_width < kGlyphCols) {
    throw std::invalid_argument("render_text: label of length " + std::to_string(length) +
                                " does not fit a canvas " + std::to_string(width) + " wide");
  }
  l.advance = l.glyph_width + 1;
  const std::size_t total = length * l.advance - 1;
  l.left = (width - total) / 2;
  l.top = (height - l.glyph_height) / 2;
  return l;
}

Image render_text(std::string_view label, std::size_t width, std::size_t height) {
  const TextLayout l = layout_text(label.size(), width, height);
  Image img(width, height, kBackground);
  for (std::size_t n = 0; n < label.size(); ++n) {
    const Glyph& g = glyph(label[n]);
    const std::size_t x0 = l.left + n * l.advance;
    for (std::size_t r = 0; r < l.glyph_height; ++r) {
      const std::size_t src_r = r * kGlyphRows / l.glyph_height;
      for (std::size_t c = 0; c < l.glyph_width; ++c) {
        const std::size_t src_c = c * kGlyphCols / l.glyph_width;
        if ((g[src_r] >> (kGlyphCols - 1 - src_c)) & 1u) img.at(l.top + r, x0 + c) = kForeground;
      }
    }
  }
  return img;
}

}  // namespace spinrect::synth
