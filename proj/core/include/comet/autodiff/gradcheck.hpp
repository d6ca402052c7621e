// Copyright 2026 The COMET Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "comet/autodiff/tensor.hpp"

namespace comet::ad {

struct CheckReport {
  double max_rel_error = 0.0;
  bool pass = true;
  std::size_t checked = 0;
  /// Flat coordinates where one-sided differences disagree (kinks such as
  /// relu at 0); reported but not counted as failures.
  std::vector<std::size_t> excluded;
  /// Coordinates whose gradient is zero to working precision.
  std::size_t negligible = 0;
  std::vector<std::size_t> failed;
};

/// Relative error with denominator max(|a|, |b|, 1e-8).
double relative_error(double a, double b) noexcept;

/// Compares the reverse-mode gradient of scalar `f` at `point` with central
/// differences, coordinate by coordinate. Coordinates where both estimates
/// are within the round-off of the difference quotient, 8 eps max(1, |f|) /
/// step, are counted as negligible instead of checked.
CheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                       double tol, double step = 1e-5);

/// Same check for a loss closure over leaf tensors that are perturbed in
/// place. The report concatenates coordinates across `leaves` in order.
CheckReport grad_check_leaves(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                              double tol, double step = 1e-5);

}  // namespace comet::ad
