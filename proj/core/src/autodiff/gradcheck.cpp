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

#include "comet/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "comet/error.hpp"

namespace comet::ad {

namespace {

double eval(const std::function<Tensor()>& loss) {
  // No active tape: forward only.
  return loss().item();
}

}  // namespace

double relative_error(double a, double b) noexcept {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

CheckReport grad_check_leaves(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                              double tol, double step) {
  for (auto& leaf : leaves) leaf.zero_grad();
  {
    Tape tape;
    Tape::Guard guard(tape);
    auto value = loss();
    tape.backward(value);
  }
  std::vector<std::vector<double>> analytic;
  for (auto& leaf : leaves) analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());

  CheckReport report;
  const double f0 = eval(loss);
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f0)) / step;
  std::size_t flat = 0;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    auto data = leaves[l].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i, ++flat) {
      const double orig = data[i];
      data[i] = orig + step;
      const double fp = eval(loss);
      data[i] = orig - step;
      const double fm = eval(loss);
      data[i] = orig;

      const double forward = (fp - f0) / step;
      const double backward = (f0 - fm) / step;
      const double scale = std::max({1.0, std::abs(forward), std::abs(backward)});
      if (std::abs(forward - backward) > 1e-2 * scale) {
        report.excluded.push_back(flat);
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * step);
      // Both below the quotient's own round-off: the coordinate is zero to
      // working precision and has no meaningful relative error.
      if (std::max(std::abs(analytic[l][i]), std::abs(numeric)) <= roundoff) {
        ++report.negligible;
        continue;
      }
      const double err = relative_error(analytic[l][i], numeric);
      ++report.checked;
      report.max_rel_error = std::max(report.max_rel_error, err);
      if (err > tol) report.failed.push_back(flat);
    }
  }
  report.pass = report.failed.empty();
  return report;
}

CheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                       double tol, double step) {
  for (double v : point.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::NumericalError, "grad_check point is not finite");
  Tensor leaf = Tensor::from(point.shape(), {point.data().begin(), point.data().end()}, true);
  std::vector<Tensor> leaves{leaf};
  return grad_check_leaves([&] { return f(leaf); }, leaves, tol, step);
}

}  // namespace comet::ad
