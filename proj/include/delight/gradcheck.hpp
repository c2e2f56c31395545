// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "delight/tensor.hpp"

namespace delight {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Worst-case agreement between analytic and central-difference gradients for
/// one tensor.
struct GradcheckGroup {
  std::string name;
  std::size_t elements = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradcheckReport {
  std::string component;
  double tolerance = 1e-4;
  std::vector<GradcheckGroup> groups;

  bool passed() const;
  double max_rel_error() const;
  /// Names of groups above tolerance, comma separated.
  std::string failing_groups() const;
};

struct GradcheckOptions {
  double tolerance = 1e-4;
  /// Step of the fourth-order central stencil
  /// (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h.
  double step = 1e-3;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

/// Checks d loss_fn / d t for every element of every tensor in `wrt` with
/// central differences in float64. `loss_fn` must be deterministic and must
/// rebuild its forward pass on every call.
GradcheckReport gradcheck(const std::string& component, const std::function<Tensor()>& loss_fn,
                          const std::vector<NamedTensor>& wrt, const GradcheckOptions& options = {});

/// Components understood by run_gradcheck(), in suite order.
const std::vector<std::string>& gradcheck_components();

/// Builds a small randomized instance of `component` ("all" runs every one)
/// and checks all of its parameters and continuous inputs.
std::vector<GradcheckReport> run_gradcheck(const std::string& component, const GradcheckOptions& options = {},
                                           std::uint64_t seed = 0);

}  // namespace delight
