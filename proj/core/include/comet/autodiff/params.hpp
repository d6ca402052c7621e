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
#include <iosfwd>
#include <string>
#include <vector>

#include "comet/autodiff/tensor.hpp"

namespace comet::ad {

struct Parameter {
  std::string name;  // dotted path, e.g. "proj.gene.W"
  Tensor tensor;
};

/// Ordered, uniquely named set of learnable tensors.
class ParameterStore {
 public:
  Tensor& add(std::string name, Shape shape, std::vector<double> values);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter>& all() noexcept { return params_; }
  const std::vector<Parameter>& all() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t total_values() const noexcept;

  void zero_grad();
  /// Deep copy of values; the copy has its own leaves.
  ParameterStore clone() const;
  /// Copies values from `other`, which must have identical names and shapes.
  void assign(const ParameterStore& other);

  /// True when names, shapes and every value match bit-for-bit.
  bool bitwise_equal(const ParameterStore& other) const;

 private:
  std::vector<Parameter> params_;
};

inline constexpr std::uint32_t kParamFormatVersion = 1;

/// Flat binary container: magic "CMTPARAM", u32 version, u64 count, then per
/// parameter u32 name length, name bytes, u8 dtype (1 = float64), u32 rank,
/// u64 dims, little-endian values.
void write_parameters(std::ostream& out, const ParameterStore& params);
ParameterStore read_parameters(std::istream& in);

}  // namespace comet::ad
