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

#include <cstdint>
#include <span>
#include <vector>

#include "comet/autodiff/tensor.hpp"
#include "comet/rng.hpp"

namespace comet::ad {

// Binary elementwise ops accept identical shapes, or `b` whose shape is a
// suffix of `a`'s (b is broadcast over a's leading axes). Nothing else
// broadcasts; use reshape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
Tensor neg(const Tensor& x);

/// a: [..., m, k]. b: [k, n] (shared across a's leading axes) or
/// [..., k, n] with a's leading axes. `transpose_b` reads b as [..., n, k].
Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b = false);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
/// log(sigmoid(x)) without overflow for large |x|.
Tensor log_sigmoid(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
/// Normalizes to zero mean and unit variance along `axis`; no affine.
Tensor layer_norm(const Tensor& x, std::size_t axis, double eps = 1e-5);

Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor max(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b);
Tensor reshape(const Tensor& x, Shape shape);

/// Rows of table [V, D] selected by `indices` -> [n, D].
Tensor embedding_lookup(const Tensor& table, std::span<const std::uint32_t> indices);

/// Softmax of x [M, C] within groups of rows sharing a segment id, per
/// column. Segment ids are in [0, num_segments).
Tensor segment_softmax(const Tensor& x, std::span<const std::uint32_t> segments,
                       std::size_t num_segments);
/// Row sums of x [M, C] per segment -> [num_segments, C].
Tensor segment_sum(const Tensor& x, std::span<const std::uint32_t> segments,
                   std::size_t num_segments);

/// Inverted dropout; identity when rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace comet::ad
