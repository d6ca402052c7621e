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

#include "comet/autodiff/tensor.hpp"

#include <algorithm>
#include <atomic>

#include "comet/error.hpp"

namespace comet::ad {

namespace {

thread_local Tape* t_active = nullptr;
std::atomic<bool> g_finite_checks{true};

}  // namespace

std::size_t numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (ad::numel(shape) != values.size())
    throw Error(ErrorCode::ShapeError, "shape " + to_string(shape) + " does not hold " +
                                           std::to_string(values.size()) + " values");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  const auto n = ad::numel(shape);
  return from(std::move(shape), std::vector<double>(n, v), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({}, {v}, requires_grad); }

double Tensor::item() const {
  if (numel() != 1)
    throw Error(ErrorCode::ShapeError, "item() on tensor of shape " + ad::to_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) throw Error(ErrorCode::ShapeError, "index rank mismatch");
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape()[axis]) throw Error(ErrorCode::ShapeError, "index out of range");
    flat = flat * shape()[axis++] + i;
  }
  return node_->value[flat];
}

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw Error(ErrorCode::ShapeError,
                "backward needs a scalar loss, got " +
                    (loss.defined() ? ad::to_string(loss.shape()) : std::string("undefined")));
  if (nodes_.empty()) throw Error(ErrorCode::ShapeError, "backward on an empty tape");
  auto* root = loss.node();
  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.backward && n.grad.size() == n.value.size()) n.backward();
  }
}

Tape::Guard::Guard(Tape& tape) : previous_(t_active) { t_active = &tape; }
Tape::Guard::~Guard() { t_active = previous_; }

Tape* active_tape() noexcept { return t_active; }

void set_finite_checks(bool enabled) noexcept { g_finite_checks = enabled; }
bool finite_checks() noexcept { return g_finite_checks; }

}  // namespace comet::ad
