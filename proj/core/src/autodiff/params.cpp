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

#include "comet/autodiff/params.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "comet/error.hpp"
#include "binary_io.hpp"

namespace comet::ad {

using detail::get;
using detail::put;
using detail::put_f64;

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'M', 'T', 'P', 'A', 'R', 'A', 'M'};
constexpr std::uint8_t kFloat64 = 1;

}  // namespace

Tensor& ParameterStore::add(std::string name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw Error(ErrorCode::InvalidConfig, "duplicate parameter '" + name + "'");
  params_.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values), true)});
  return params_.back().tensor;
}

Tensor& ParameterStore::get(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.tensor;
  throw Error(ErrorCode::InvalidConfig, "unknown parameter '" + name + "'");
}

const Tensor& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterStore::total_values() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

ParameterStore ParameterStore::clone() const {
  ParameterStore out;
  for (const auto& p : params_)
    out.add(p.name, p.tensor.shape(), std::vector<double>(p.tensor.data().begin(), p.tensor.data().end()));
  return out;
}

void ParameterStore::assign(const ParameterStore& other) {
  if (other.size() != size()) throw Error(ErrorCode::InvalidConfig, "parameter count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& mine = params_[i];
    const auto& theirs = other.params_[i];
    if (mine.name != theirs.name || mine.tensor.shape() != theirs.tensor.shape())
      throw Error(ErrorCode::InvalidConfig, "parameter layout mismatch at '" + mine.name + "'");
    auto dst = mine.tensor.mutable_data();
    std::copy(theirs.tensor.data().begin(), theirs.tensor.data().end(), dst.begin());
  }
}

bool ParameterStore::bitwise_equal(const ParameterStore& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.tensor.shape() != b.tensor.shape()) return false;
    if (std::memcmp(a.tensor.data().data(), b.tensor.data().data(), a.tensor.numel() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

void write_parameters(std::ostream& out, const ParameterStore& params) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kParamFormatVersion);
  put<std::uint64_t>(out, params.size());
  for (const auto& p : params.all()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint8_t>(out, kFloat64);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto d : p.tensor.shape()) put<std::uint64_t>(out, d);
    for (double v : p.tensor.data()) put_f64(out, v);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing parameter container");
}

ParameterStore read_parameters(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic)
    throw Error(ErrorCode::FormatError, "bad parameter container magic");
  const auto version = get<std::uint32_t>(in, "parameter container");
  if (version != kParamFormatVersion)
    throw Error(ErrorCode::IncompatibleCheckpoint,
                "parameter container version " + std::to_string(version) + ", expected " +
                    std::to_string(kParamFormatVersion));
  const auto count = get<std::uint64_t>(in, "parameter container");
  ParameterStore params;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in, "parameter container");
    if (len > (1u << 16)) throw Error(ErrorCode::FormatError, "implausible parameter name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) throw Error(ErrorCode::FormatError, "truncated parameter name");
    if (get<std::uint8_t>(in, "parameter container") != kFloat64) throw Error(ErrorCode::FormatError, "unsupported dtype for '" + name + "'");
    const auto rank = get<std::uint32_t>(in, "parameter container");
    if (rank > 8) throw Error(ErrorCode::FormatError, "implausible rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(in, "parameter container");
    const auto n = numel(shape);
    if (n > (std::size_t{1} << 32)) throw Error(ErrorCode::FormatError, "implausible size for '" + name + "'");
    std::vector<double> values(n);
    for (auto& v : values) v = std::bit_cast<double>(get<std::uint64_t>(in, "parameter container"));
    params.add(std::move(name), std::move(shape), std::move(values));
  }
  return params;
}

}  // namespace comet::ad
