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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "comet/autodiff/gradcheck.hpp"
#include "comet/autodiff/ops.hpp"
#include "comet/autodiff/params.hpp"
#include "comet/error.hpp"
#include "comet/parallel.hpp"
#include "comet/rng.hpp"

namespace comet::ad {
namespace {

constexpr double kTol = 1e-6;

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

// Triple loop over [m,k] x [k,n].
std::vector<double> naive_matmul(std::span<const double> a, std::span<const double> b, std::size_t m,
                                 std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

void expect_close(std::span<const double> got, std::span<const double> want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "at " << i;
}

void expect_grad_ok(const std::function<Tensor(const Tensor&)>& f, const Tensor& point, double tol = 1e-5) {
  const auto rep = grad_check(f, point, tol);
  EXPECT_TRUE(rep.pass) << "max rel error " << rep.max_rel_error << ", failed " << rep.failed.size();
  EXPECT_GT(rep.checked, 0u);
}

TEST(Matmul, MatchesNaiveSmallAndBlasSizes) {
  for (auto [m, k, n] : {std::tuple{3, 4, 5}, {1, 7, 1}, {40, 33, 29}, {130, 70, 64}}) {
    auto a = random_tensor({std::size_t(m), std::size_t(k)}, 1);
    auto b = random_tensor({std::size_t(k), std::size_t(n)}, 2);
    const auto want = naive_matmul(a.data(), b.data(), m, k, n);
    expect_close(matmul(a, b).data(), want, 1e-12);
  }
}

TEST(Matmul, TransposedAndBatched) {
  auto a = random_tensor({2, 3, 4}, 3);
  auto bt = random_tensor({5, 4}, 4);
  const auto c = matmul(a, bt, true);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 5}));
  std::vector<double> b(20);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t j = 0; j < 5; ++j) b[p * 5 + j] = bt.data()[j * 4 + p];
  for (std::size_t s = 0; s < 2; ++s) {
    const auto want = naive_matmul(a.data().subspan(s * 12, 12), b, 3, 4, 5);
    expect_close(c.data().subspan(s * 15, 15), want, 1e-12);
  }
}

TEST(Matmul, ThreadCountDoesNotChangeBits) {
  auto a = random_tensor({600, 48}, 5);
  auto b = random_tensor({48, 40}, 6);
  set_num_threads(1);
  const auto one = matmul(a, b);
  set_num_threads(4);
  const auto four = matmul(a, b);
  set_num_threads(1);
  EXPECT_TRUE(std::equal(one.data().begin(), one.data().end(), four.data().begin()));
}

TEST(Ops, ShapeErrors) {
  auto a = random_tensor({2, 3}, 1);
  auto b = random_tensor({3, 2}, 2);
  EXPECT_THROW(add(a, b), Error);
  EXPECT_THROW(matmul(a, a), Error);
  EXPECT_THROW(softmax(a, 2), Error);
  EXPECT_THROW(reshape(a, {5}), Error);
}

TEST(Ops, NonFiniteRaises) {
  auto z = Tensor::zeros({2});
  try {
    log(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericalError);
  }
}

TEST(Ops, BroadcastSuffix) {
  auto a = random_tensor({3, 2, 4}, 1);
  auto b = random_tensor({4}, 2);
  const auto c = add(a, b);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(c.data()[i], a.data()[i] + b.data()[i % 4]);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  auto x = random_tensor({4, 7}, 3, -30, 30);
  const auto s = softmax(x, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) total += s.data()[r * 7 + c];
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, SegmentSoftmaxNormalizesEachGroup) {
  auto x = random_tensor({6, 2}, 4, -5, 5);
  const std::vector<std::uint32_t> seg{0, 2, 0, 2, 2, 0};
  const auto s = segment_softmax(x, seg, 3);
  for (std::uint32_t g : {0u, 2u})
    for (std::size_t c = 0; c < 2; ++c) {
      double total = 0.0;
      for (std::size_t r = 0; r < 6; ++r)
        if (seg[r] == g) total += s.data()[r * 2 + c];
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Ops, LogSigmoidIsStable) {
  auto x = Tensor::from({3}, {-800.0, 0.0, 800.0});
  const auto y = log_sigmoid(x);
  EXPECT_EQ(y.data()[0], -800.0);
  EXPECT_NEAR(y.data()[1], -std::log(2.0), 1e-15);
  EXPECT_EQ(y.data()[2], 0.0);
}

TEST(Ops, DropoutIsSeededAndInverted) {
  auto x = Tensor::full({1000}, 1.0);
  Rng r1(3), r2(3);
  const auto a = dropout(x, 0.25, r1);
  const auto b = dropout(x, 0.25, r2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  std::size_t kept = 0;
  for (double v : a.data()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-12);
    kept += v != 0.0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(kept), 750.0, 6 * std::sqrt(1000 * 0.25 * 0.75));
  Rng r3(3);
  const auto same = dropout(x, 0.0, r3);
  EXPECT_TRUE(std::equal(same.data().begin(), same.data().end(), x.data().begin()));
}

TEST(Gradients, Elementwise) {
  auto p = random_tensor({3, 4}, 7, 0.2, 1.5);
  auto q = random_tensor({4}, 8);
  expect_grad_ok([&](const Tensor& x) { return sum_all(mul(add(x, q), sub(x, q))); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(tanh(x)); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(sigmoid(scale(x, 3.0))); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(exp(neg(x))); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(log(x)); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(log_sigmoid(x)); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(relu(sub(x, Tensor::scalar(0.7)))); }, p);
  expect_grad_ok([](const Tensor& x) { return sum_all(leaky_relu(sub(x, Tensor::scalar(0.7)), 0.2)); }, p);
}

TEST(Gradients, BroadcastOperandAccumulates) {
  auto a = random_tensor({3, 2, 4}, 1);
  expect_grad_ok([&](const Tensor& b) { return sum_all(mul(a, mul(a, b))); }, random_tensor({4}, 2));
}

TEST(Gradients, MatmulBothSides) {
  auto a = random_tensor({2, 3, 4}, 1);
  auto b = random_tensor({4, 5}, 2);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(matmul(x, b))); }, a);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(matmul(a, x))); }, b);
  auto bt = random_tensor({2, 5, 4}, 3);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(matmul(a, x, true))); }, bt);
}

TEST(Gradients, Reductions) {
  // Every axis has at least 3 entries: layer norm over 2 values is constant
  // up to eps, so its gradient is pure round-off.
  auto p = random_tensor({3, 4, 5}, 9);
  auto w = random_tensor({3, 4, 5}, 10);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(softmax(mul(x, w), axis))); }, p);
    expect_grad_ok([&](const Tensor& x) { return sum_all(mul(layer_norm(x, axis), w)); }, p);
    expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(sum(x, axis))); }, p);
    expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(mean(x, axis))); }, p);
    expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(max(x, axis))); }, p);
  }
}

TEST(Gradients, Structural) {
  auto p = random_tensor({3, 4, 2}, 11);
  auto w = random_tensor({2, 4, 3}, 12);
  expect_grad_ok([&](const Tensor& x) { return sum_all(mul(transpose(x, 0, 2), w)); }, p);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(reshape(x, {6, 4}))); }, p);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(slice(x, 1, 1, 3))); }, p);
  expect_grad_ok(
      [&](const Tensor& x) {
        const Tensor parts[] = {x, tanh(x)};
        return sum_all(mul(concat(parts, 1), concat(parts, 1)));
      },
      p);
}

TEST(Gradients, RaggedOps) {
  auto p = random_tensor({5, 3}, 13);
  const std::vector<std::uint32_t> idx{4, 0, 0, 2};
  const std::vector<std::uint32_t> seg{1, 0, 1, 1, 0};
  auto w = random_tensor({5, 3}, 14);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(embedding_lookup(x, idx))); }, p);
  expect_grad_ok([&](const Tensor& x) { return sum_all(mul(segment_softmax(x, seg, 2), w)); }, p);
  expect_grad_ok([&](const Tensor& x) { return sum_all(tanh(segment_sum(x, seg, 3))); }, p);
}

TEST(Gradients, DropoutUsesSameMask) {
  auto p = random_tensor({20}, 15);
  expect_grad_ok(
      [](const Tensor& x) {
        Rng rng(4);
        return sum_all(mul(dropout(x, 0.3, rng), x));
      },
      p);
}

TEST(Tape, GradientsAccumulateUntilZeroed) {
  auto x = Tensor::from({2}, {1.0, 2.0}, true);
  for (int rep = 0; rep < 2; ++rep) {
    Tape tape;
    Tape::Guard guard(tape);
    tape.backward(sum_all(mul(x, x)));
  }
  EXPECT_EQ(x.grad()[0], 4.0);
  EXPECT_EQ(x.grad()[1], 8.0);
  x.zero_grad();
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Tape, NothingRecordedWithoutGuard) {
  Tape tape;
  auto x = Tensor::from({2}, {1.0, 2.0}, true);
  sum_all(mul(x, x));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Params, RoundTripAndCorruption) {
  ParameterStore ps;
  ps.add("a.W", {2, 3}, {1, 2, 3, 4, 5, 6.5});
  ps.add("b", {1}, {-0.0});
  std::stringstream buf;
  write_parameters(buf, ps);
  const std::string bytes = buf.str();
  {
    std::istringstream in(bytes);
    const auto back = read_parameters(in);
    EXPECT_TRUE(back.bitwise_equal(ps));
  }
  auto code_for = [](const std::string& b) {
    std::istringstream in(b);
    try {
      read_parameters(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::DegenerateConfig;
  };
  EXPECT_EQ(code_for(bytes.substr(0, bytes.size() - 3)), ErrorCode::FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(code_for(bad), ErrorCode::FormatError);
  std::string ver = bytes;
  ver[8] = 9;
  EXPECT_EQ(code_for(ver), ErrorCode::IncompatibleCheckpoint);
}

TEST(Params, CloneIsIndependent) {
  ParameterStore ps;
  ps.add("w", {2}, {1, 2});
  auto copy = ps.clone();
  copy.get("w").mutable_data()[0] = 5;
  EXPECT_EQ(ps.get("w").data()[0], 1.0);
  EXPECT_FALSE(copy.bitwise_equal(ps));
  ps.assign(copy);
  EXPECT_TRUE(copy.bitwise_equal(ps));
}

TEST(GradCheck, DetectsWrongGradient) {
  // A function whose reverse rule is deliberately inconsistent: the value
  // uses x*x but the graph sees a detached copy for one factor.
  auto p = random_tensor({3}, 1, 0.5, 1.0);
  const auto rep = grad_check([](const Tensor& x) { return sum_all(mul(x, x.detach())); }, p, kTol);
  EXPECT_FALSE(rep.pass);
}

}  // namespace
}  // namespace comet::ad
