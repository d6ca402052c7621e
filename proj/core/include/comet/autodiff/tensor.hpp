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
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace comet::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

/// Storage plus autodiff bookkeeping. Gradients are allocated lazily.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::function<void()> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

/// Shared handle to a dense row-major 64-bit array.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape[i]; }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  /// Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<double> mutable_data() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

  bool requires_grad() const { return node_->requires_grad; }
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  /// Fresh leaf with the same values and no history.
  Tensor detach() const;

  Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Records differentiable operations while a Guard for it is active on the
/// current thread. Entries are appended in execution order, which is a
/// topological order of the computation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::shared_ptr<Node> node) { nodes_.push_back(std::move(node)); }
  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and runs backward rules in reverse order.
  /// Gradients accumulate into leaves; callers zero them between steps.
  void backward(const Tensor& loss);

  class Guard {
   public:
    explicit Guard(Tape& tape);
    ~Guard();
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    Tape* previous_;
  };

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
};

Tape* active_tape() noexcept;

/// Non-finite results raise NumericalError when enabled (default on).
void set_finite_checks(bool enabled) noexcept;
bool finite_checks() noexcept;

}  // namespace comet::ad
