// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "spinrect/synth.hpp"

namespace spinrect::synth {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const Image& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.pixels.size());
  for (double v : image.pixels) out.push_back(to_byte(v));
  return out;
}

Image decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto fail = [](const std::string& what) { throw std::runtime_error("PGM: " + what); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::size_t v = 0, digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      ++digits;
    }
    if (digits == 0) fail("malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail("not a binary P5 file");
  pos = 2;
  const std::size_t w = number(), h = number(), maxval = number();
  if (maxval != 255) fail("maxval " + std::to_string(maxval) + " unsupported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("malformed header");
  ++pos;
  if (bytes.size() - pos != w * h) fail("payload size mismatch");
  Image img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) img.pixels[i] = bytes[pos + i] / 255.0;
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Image quantize(const Image& image) {
  Image out = image;
  for (double& v : out.pixels) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace spinrect::synth
