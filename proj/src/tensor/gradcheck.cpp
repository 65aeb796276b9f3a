// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0

#include "spinrect/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spinrect/random.hpp"

namespace spinrect {

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x_in,
                           const GradCheckOptions& options) {
  Tensor x = x_in;
  const bool previous_flag = x.requires_grad();
  x.set_requires_grad(true);
  x.zero_grad();

  std::vector<double> analytic(x.numel(), 0.0);
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor out = f(x);
    if (out.numel() != 1) throw ShapeError("grad_check: function must return a scalar");
    if (out.requires_grad()) {
      tape.backward(out);
      if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
    }
  }

  auto eval = [&] { return f(x).item(); };

  std::vector<std::size_t> coords(x.numel());
  std::iota(coords.begin(), coords.end(), 0);
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    Rng rng(options.seed);
    auto order = rng.permutation(coords.size());
    order.resize(options.max_coords);
    std::sort(order.begin(), order.end());
    coords = std::move(order);
  }

  GradCheckReport report;
  auto values = x.mutable_data();
  for (std::size_t i : coords) {
    const double original = values[i];
    auto central = [&](double step) {
      values[i] = original + step;
      const double fp = eval();
      values[i] = original - step;
      const double fm = eval();
      values[i] = original;
      return (fp - fm) / (2.0 * step);
    };
    const double h = options.step_scale * std::max(1.0, std::abs(original));
    double numeric = 0.0;
    if (!options.skip_kinks) {
      numeric = central(h);
    } else {
      bool smooth = false;
      for (double step : {h, h / 10.0}) {
        const double coarse = central(step);
        const double fine = central(step / 2.0);
        const double scale = std::max({std::abs(coarse), std::abs(fine), options.denom_floor});
        if (std::abs(coarse - fine) <= 0.25 * options.tolerance * scale) {
          numeric = fine;
          smooth = true;
          break;
        }
      }
      if (!smooth) {
        ++report.skipped;
        continue;
      }
    }
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), options.denom_floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    ++report.checked;
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.analytic_at_worst = analytic[i];
      report.numeric_at_worst = numeric;
    }
  }
  report.passed = report.max_rel_error < options.tolerance && report.checked > 0 &&
                  report.skipped <= report.checked;
  if (coords.empty()) report.passed = true;
  x.zero_grad();
  x.set_requires_grad(previous_flag);
  return report;
}

}  // namespace spinrect
