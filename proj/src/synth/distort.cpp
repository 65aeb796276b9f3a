// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spinrect/random.hpp"
#include "spinrect/synth.hpp"

namespace spinrect::synth {
namespace {

constexpr std::array<std::pair<Chromatic, std::string_view>, 6> kChromaticNames = {{
    {Chromatic::gamma, "gamma"},
    {Chromatic::brightness_shift, "brightness_shift"},
    {Chromatic::contrast_collapse, "contrast_collapse"},
    {Chromatic::shadow_ramp, "shadow_ramp"},
    {Chromatic::additive_noise, "additive_noise"},
    {Chromatic::pattern_coherence, "pattern_coherence"},
}};

constexpr std::array<std::pair<Geometric, std::string_view>, 3> kGeometricNames = {{
    {Geometric::rotation, "rotation"},
    {Geometric::perspective, "perspective"},
    {Geometric::curvature, "curvature"},
}};

// Application order; pattern coherence goes first so the painted band
// shares every later intensity change with the glyphs.
constexpr std::array<Chromatic, 6> kChromaticOrder = {
    Chromatic::pattern_coherence, Chromatic::gamma,       Chromatic::brightness_shift,
    Chromatic::contrast_collapse, Chromatic::shadow_ramp, Chromatic::additive_noise};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

bool has(const std::vector<Chromatic>& ops, Chromatic op) {
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}
bool has(const std::vector<Geometric>& ops, Geometric op) {
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

void apply_op(Image& img, Chromatic op, double s, Rng& rng) {
  auto& px = img.pixels;
  switch (op) {
    case Chromatic::gamma: {
      const double e = 1.0 + 3.0 * s * rng.uniform();
      const double exponent = rng.coin() ? e : 1.0 / e;
      for (double& v : px) v = clamp01(std::pow(v, exponent));
      break;
    }
    case Chromatic::brightness_shift: {
      const double shift = 0.4 * s * rng.uniform(-1.0, 1.0);
      for (double& v : px) v = clamp01(v + shift);
      break;
    }
    case Chromatic::contrast_collapse: {
      const double f = 1.0 - 0.8 * s;
      for (double& v : px) v = clamp01(0.5 + (v - 0.5) * f);
      break;
    }
    case Chromatic::shadow_ramp: {
      const bool left_dark = rng.coin();
      const double span = img.width > 1 ? static_cast<double>(img.width - 1) : 1.0;
      for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t c = 0; c < img.width; ++c) {
          const double t = static_cast<double>(c) / span;
          const double ramp = left_dark ? 1.0 - t : t;
          img.at(r, c) = clamp01(img.at(r, c) * (1.0 - 0.7 * s * ramp));
        }
      }
      break;
    }
    case Chromatic::additive_noise: {
      const double sigma = 0.1 * s;
      for (double& v : px) v = clamp01(v + sigma * rng.normal());
      break;
    }
    case Chromatic::pattern_coherence: {
      const auto band = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(0.3 * s * static_cast<double>(img.width))));
      const std::size_t start = rng.index(img.width - std::min(band, img.width) + 1);
      const auto rows = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(img.height))));
      for (std::size_t r = 0; r < std::min(rows, img.height); ++r) {
        for (std::size_t c = start; c < std::min(start + band, img.width); ++c) {
          if (img.at(r, c) < 0.5) img.at(r, c) = kForeground;
        }
      }
      break;
    }
  }
}

struct Point {
  double x, y;
};

// Homography taking the output rectangle's corners to `to`.
Eigen::Matrix3d corner_homography(const std::array<Point, 4>& from, const std::array<Point, 4>& to) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = from[i].x, y = from[i].y, u = to[i].x, v = to[i].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(b);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return m;
}

}  // namespace

std::string_view name(Chromatic op) {
  for (const auto& [k, v] : kChromaticNames) {
    if (k == op) return v;
  }
  return "?";
}

std::string_view name(Geometric op) {
  for (const auto& [k, v] : kGeometricNames) {
    if (k == op) return v;
  }
  return "?";
}

Chromatic parse_chromatic(std::string_view s) {
  for (const auto& [k, v] : kChromaticNames) {
    if (v == s) return k;
  }
  throw std::invalid_argument("unknown chromatic distortion '" + std::string(s) + "'");
}

Geometric parse_geometric(std::string_view s) {
  for (const auto& [k, v] : kGeometricNames) {
    if (v == s) return k;
  }
  throw std::invalid_argument("unknown geometric distortion '" + std::string(s) + "'");
}

Image apply_chromatic(const Image& image, const DistortionSpec& spec) {
  Image out = image;
  if (spec.severity == 0.0) return out;
  for (Chromatic op : kChromaticOrder) {
    if (!has(spec.chromatic, op)) continue;
    Rng rng(derive_seed(spec.seed, 0x100 + static_cast<std::uint64_t>(op)));
    apply_op(out, op, spec.severity, rng);
  }
  return out;
}

double sample_bilinear(const Image& image, double row, double col) {
  if (!std::isfinite(row) || !std::isfinite(col)) return 0.0;
  const double r0 = std::floor(row), c0 = std::floor(col);
  const double fr = row - r0, fc = col - c0;
  auto px = [&](double r, double c) -> double {
    if (r < 0 || c < 0 || r >= static_cast<double>(image.height) ||
        c >= static_cast<double>(image.width)) {
      return 0.0;
    }
    return image.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  return px(r0, c0) * (1 - fr) * (1 - fc) + px(r0, c0 + 1) * (1 - fr) * fc +
         px(r0 + 1, c0) * fr * (1 - fc) + px(r0 + 1, c0 + 1) * fr * fc;
}

namespace {

template <typename Map>
Image resample(const Image& image, Map&& map) {
  Image out(image.width, image.height);
  for (std::size_t r = 0; r < image.height; ++r) {
    for (std::size_t c = 0; c < image.width; ++c) {
      Point p{static_cast<double>(c), static_cast<double>(r)};
      p = map(p);
      out.at(r, c) = clamp01(sample_bilinear(image, p.y, p.x));
    }
  }
  return out;
}

Point rotate_about_centre(const Image& image, Point p, double radians) {
  const double cx = (static_cast<double>(image.width) - 1) / 2;
  const double cy = (static_cast<double>(image.height) - 1) / 2;
  const double c = std::cos(radians), s = std::sin(radians);
  const double dx = p.x - cx, dy = p.y - cy;
  return {cx + c * dx + s * dy, cy - s * dx + c * dy};
}

}  // namespace

Image rotate(const Image& image, double degrees) {
  if (degrees == 0.0) return image;
  const double rad = degrees * std::numbers::pi / 180.0;
  return resample(image, [&](Point p) { return rotate_about_centre(image, p, rad); });
}

Image apply_geometric(const Image& image, const DistortionSpec& spec) {
  const double s = spec.severity;
  if (s == 0.0 || spec.geometric.empty()) return image;
  const double w = static_cast<double>(image.width), h = static_cast<double>(image.height);

  double amplitude = 0.0, phase = 0.0;
  if (has(spec.geometric, Geometric::curvature)) {
    Rng rng(derive_seed(spec.seed, 0x200 + static_cast<std::uint64_t>(Geometric::curvature)));
    amplitude = 0.2 * s * h * rng.uniform(-1.0, 1.0);
    phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  double radians = 0.0;
  if (has(spec.geometric, Geometric::rotation)) {
    Rng rng(derive_seed(spec.seed, 0x200 + static_cast<std::uint64_t>(Geometric::rotation)));
    radians = 25.0 * s * rng.uniform(-1.0, 1.0) * std::numbers::pi / 180.0;
  }
  const bool perspective = has(spec.geometric, Geometric::perspective);
  Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();
  if (perspective) {
    Rng rng(derive_seed(spec.seed, 0x200 + static_cast<std::uint64_t>(Geometric::perspective)));
    const std::array<Point, 4> corners = {{{0, 0}, {w - 1, 0}, {w - 1, h - 1}, {0, h - 1}}};
    std::array<Point, 4> moved = corners;
    for (auto& p : moved) {
      p.x += 0.15 * s * w * rng.uniform(-1.0, 1.0);
      p.y += 0.15 * s * h * rng.uniform(-1.0, 1.0);
    }
    homography = corner_homography(corners, moved);
  }

  return resample(image, [&](Point p) {
    if (amplitude != 0.0) p.y += amplitude * std::sin(2.0 * std::numbers::pi * p.x / w + phase);
    if (radians != 0.0) p = rotate_about_centre(image, p, radians);
    if (perspective) {
      const Eigen::Vector3d q = homography * Eigen::Vector3d(p.x, p.y, 1.0);
      p = {q(0) / q(2), q(1) / q(2)};
    }
    return p;
  });
}

}  // namespace spinrect::synth
