// Copyright 2026 The spinrect Authors
// SPDX-License-Identifier: Apache-2.0
//
// The finite-difference gradient suite over every differentiable operation
// and model, run by the CLI and the test binaries.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spinrect/gradcheck.hpp"

namespace spinrect {

struct GradSuiteResult {
  std::string name;
  double tolerance = 0.0;
  GradCheckReport report;
};

/// Runs every case whose name contains `filter` (all when empty). `on_case`
/// is called after each case.
std::vector<GradSuiteResult> run_grad_suite(
    const std::string& filter = "",
    const std::function<void(const GradSuiteResult&)>& on_case = {});

std::vector<std::string> grad_suite_names();

}  // namespace spinrect
