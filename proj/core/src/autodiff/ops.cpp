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

#include "comet/autodiff/ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "comet/error.hpp"
#include "comet/parallel.hpp"
#include "gemm.hpp"

namespace comet::ad {

namespace {

using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_error(const std::string& op, const std::string& what) {
  throw Error(ErrorCode::ShapeError, op + ": " + what);
}

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (!active_tape()) return false;
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

bool recording(std::span<const Tensor> inputs) {
  if (!active_tape()) return false;
  for (const auto& t : inputs)
    if (t.requires_grad()) return true;
  return false;
}

void check_finite(const char* op, const std::vector<double>& v) {
  if (!finite_checks()) return;
  // Branch-free exponent test so the scan vectorizes; all-ones exponent is inf or nan.
  constexpr std::uint64_t kExp = 0x7FF0000000000000ULL;
  std::uint64_t bad = 0;
  for (double x : v) bad |= static_cast<std::uint64_t>((std::bit_cast<std::uint64_t>(x) & kExp) == kExp);
  if (bad) throw Error(ErrorCode::NumericalError, std::string(op) + " produced a non-finite value");
}

/// Wraps a forward result; when `record` is set, `bw(out)` becomes the
/// node's backward rule and the node is appended to the active tape.
template <typename Backward>
Tensor finish(const char* op, Shape shape, std::vector<double> value, bool record, Backward bw) {
  check_finite(op, value);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (record) {
    node->requires_grad = true;
    Node* out = node.get();
    node->backward = [out, bw = std::move(bw)]() mutable { bw(*out); };
    active_tape()->record(node);
  }
  return Tensor(std::move(node));
}

std::vector<double>* grad_of(const NodePtr& n) {
  if (!n->requires_grad) return nullptr;
  n->ensure_grad();
  return &n->grad;
}

struct Axis {
  std::size_t outer = 1, len = 1, inner = 1;
};

Axis split_axis(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size()) shape_error(op, "axis " + std::to_string(axis) + " out of range for " + to_string(s));
  Axis a;
  for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
  a.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

std::size_t broadcast_inner(const Tensor& a, const Tensor& b, const char* op) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sb.size() > sa.size() || !std::equal(sb.begin(), sb.end(), sa.end() - static_cast<std::ptrdiff_t>(sb.size())))
    shape_error(op, to_string(sb) + " does not broadcast onto " + to_string(sa));
  return b.numel();
}

// Visits the start offset of each `inner`-sized row of a flat array.
template <typename F>
void for_rows(std::size_t total, std::size_t inner, F&& f) {
  if (inner == 0) return;
  for (std::size_t base = 0; base < total; base += inner) f(base);
}

template <typename Fwd, typename Bwd>
Tensor unary(const char* op, const Tensor& x, Fwd f, Bwd dfdx) {
  const auto& xv = x.node()->value;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const bool rec = recording({&x});
  return finish(op, x.shape(), std::move(out), rec, [xn = x.ptr(), dfdx](Node& o) {
    if (auto* g = grad_of(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i] * dfdx(xn->value[i], o.value[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const std::size_t inner = broadcast_inner(a, b, "add");
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(av.size());
  for_rows(av.size(), inner, [&](std::size_t base) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] = av[base + j] + bv[j];
  });
  return finish("add", a.shape(), std::move(out), recording({&a, &b}),
                [an = a.ptr(), bn = b.ptr(), inner](Node& o) {
                  if (auto* g = grad_of(an))
                    for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i];
                  if (auto* g = grad_of(bn))
                    for_rows(o.grad.size(), inner, [&](std::size_t base) {
                      for (std::size_t j = 0; j < inner; ++j) (*g)[j] += o.grad[base + j];
                    });
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const std::size_t inner = broadcast_inner(a, b, "sub");
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(av.size());
  for_rows(av.size(), inner, [&](std::size_t base) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] = av[base + j] - bv[j];
  });
  return finish("sub", a.shape(), std::move(out), recording({&a, &b}),
                [an = a.ptr(), bn = b.ptr(), inner](Node& o) {
                  if (auto* g = grad_of(an))
                    for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i];
                  if (auto* g = grad_of(bn))
                    for_rows(o.grad.size(), inner, [&](std::size_t base) {
                      for (std::size_t j = 0; j < inner; ++j) (*g)[j] -= o.grad[base + j];
                    });
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const std::size_t inner = broadcast_inner(a, b, "mul");
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(av.size());
  for_rows(av.size(), inner, [&](std::size_t base) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] = av[base + j] * bv[j];
  });
  return finish("mul", a.shape(), std::move(out), recording({&a, &b}),
                [an = a.ptr(), bn = b.ptr(), inner](Node& o) {
                  const auto& bv = bn->value;
                  const auto& av = an->value;
                  if (auto* g = grad_of(an))
                    for_rows(o.grad.size(), inner, [&](std::size_t base) {
                      for (std::size_t j = 0; j < inner; ++j) (*g)[base + j] += o.grad[base + j] * bv[j];
                    });
                  if (auto* g = grad_of(bn))
                    for_rows(o.grad.size(), inner, [&](std::size_t base) {
                      for (std::size_t j = 0; j < inner; ++j) (*g)[j] += o.grad[base + j] * av[base + j];
                    });
                });
}

Tensor scale(const Tensor& x, double c) {
  return unary("scale", x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) shape_error("matmul", "operands need rank >= 2");
  const std::size_t k = sa.back();
  const std::size_t bk = transpose_b ? sb[sb.size() - 1] : sb[sb.size() - 2];
  const std::size_t n = transpose_b ? sb[sb.size() - 2] : sb[sb.size() - 1];
  if (bk != k) shape_error("matmul", to_string(sa) + " x " + to_string(sb) + (transpose_b ? "^T" : ""));

  const bool shared_b = sb.size() == 2;
  std::size_t batch = 1;
  std::size_t m = 0;
  if (shared_b) {
    m = a.numel() / k;  // leading axes fold into rows
  } else {
    if (sb.size() != sa.size() || !std::equal(sa.begin(), sa.end() - 2, sb.begin()))
      shape_error("matmul", "batch axes differ: " + to_string(sa) + " vs " + to_string(sb));
    for (std::size_t i = 0; i + 2 < sa.size(); ++i) batch *= sa[i];
    m = sa[sa.size() - 2];
  }
  const std::size_t ldb = transpose_b ? k : n;
  Shape out_shape = sa;
  out_shape.back() = n;
  std::vector<double> out(numel(out_shape));
  const double* ap = a.node()->value.data();
  const double* bp = b.node()->value.data();
  const std::size_t a_stride = m * k, b_stride = shared_b ? 0 : k * n, c_stride = m * n;
  parallel_for(batch, 64, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t i = b0; i < b1; ++i)
      detail::gemm(false, transpose_b, m, n, k, ap + i * a_stride, k, bp + i * b_stride, ldb, 0.0,
                   out.data() + i * c_stride, n);
  });

  return finish("matmul", std::move(out_shape), std::move(out), recording({&a, &b}),
                [an = a.ptr(), bn = b.ptr(), batch, m, n, k, transpose_b, shared_b, ldb, a_stride,
                 b_stride, c_stride](Node& o) {
                  const double* gc = o.grad.data();
                  if (auto* ga = grad_of(an)) {
                    // dA = dC * op(B)^T
                    parallel_for(batch, 64, [&](std::size_t b0, std::size_t b1) {
                      for (std::size_t i = b0; i < b1; ++i)
                        detail::gemm(false, !transpose_b, m, k, n, gc + i * c_stride, n,
                                     bn->value.data() + i * b_stride, ldb, 1.0,
                                     ga->data() + i * a_stride, k);
                    });
                  }
                  if (auto* gb = grad_of(bn)) {
                    if (shared_b) {
                      const std::size_t rows = batch * m;
                      if (!transpose_b)
                        detail::gemm(true, false, k, n, rows, an->value.data(), k, gc, n, 1.0, gb->data(), n);
                      else
                        detail::gemm(true, false, n, k, rows, gc, n, an->value.data(), k, 1.0, gb->data(), k);
                    } else {
                      parallel_for(batch, 64, [&](std::size_t b0, std::size_t b1) {
                        for (std::size_t i = b0; i < b1; ++i) {
                          if (!transpose_b)
                            detail::gemm(true, false, k, n, m, an->value.data() + i * a_stride, k,
                                         gc + i * c_stride, n, 1.0, gb->data() + i * b_stride, n);
                          else
                            detail::gemm(true, false, n, k, m, gc + i * c_stride, n,
                                         an->value.data() + i * a_stride, k, 1.0,
                                         gb->data() + i * b_stride, k);
                        }
                      });
                    }
                  }
                });
}

Tensor relu(const Tensor& x) {
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary("leaky_relu", x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary("exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary("log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary("log_sigmoid", x,
               [](double v) { return std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v))); },
               [](double v, double) { return stable_sigmoid(-v); });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto ax = split_axis(x.shape(), axis, "softmax");
  const auto& xv = x.node()->value;
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < ax.outer; ++o)
    for (std::size_t in = 0; in < ax.inner; ++in) {
      const std::size_t base = o * ax.len * ax.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < ax.len; ++l) mx = std::max(mx, xv[base + l * ax.inner]);
      double total = 0.0;
      for (std::size_t l = 0; l < ax.len; ++l) {
        const double e = std::exp(xv[base + l * ax.inner] - mx);
        out[base + l * ax.inner] = e;
        total += e;
      }
      for (std::size_t l = 0; l < ax.len; ++l) out[base + l * ax.inner] /= total;
    }
  return finish("softmax", x.shape(), std::move(out), recording({&x}), [xn = x.ptr(), ax](Node& o) {
    auto* g = grad_of(xn);
    if (!g) return;
    for (std::size_t oi = 0; oi < ax.outer; ++oi)
      for (std::size_t in = 0; in < ax.inner; ++in) {
        const std::size_t base = oi * ax.len * ax.inner + in;
        double dot = 0.0;
        for (std::size_t l = 0; l < ax.len; ++l) dot += o.grad[base + l * ax.inner] * o.value[base + l * ax.inner];
        for (std::size_t l = 0; l < ax.len; ++l) {
          const std::size_t i = base + l * ax.inner;
          (*g)[i] += o.value[i] * (o.grad[i] - dot);
        }
      }
  });
}

Tensor layer_norm(const Tensor& x, std::size_t axis, double eps) {
  const auto ax = split_axis(x.shape(), axis, "layer_norm");
  const auto& xv = x.node()->value;
  std::vector<double> out(xv.size());
  std::vector<double> rstd(ax.outer * ax.inner);
  const double inv_len = 1.0 / static_cast<double>(ax.len);
  for (std::size_t o = 0; o < ax.outer; ++o)
    for (std::size_t in = 0; in < ax.inner; ++in) {
      const std::size_t base = o * ax.len * ax.inner + in;
      double mu = 0.0;
      for (std::size_t l = 0; l < ax.len; ++l) mu += xv[base + l * ax.inner];
      mu *= inv_len;
      double var = 0.0;
      for (std::size_t l = 0; l < ax.len; ++l) {
        const double d = xv[base + l * ax.inner] - mu;
        var += d * d;
      }
      var *= inv_len;
      const double r = 1.0 / std::sqrt(var + eps);
      rstd[o * ax.inner + in] = r;
      for (std::size_t l = 0; l < ax.len; ++l) out[base + l * ax.inner] = (xv[base + l * ax.inner] - mu) * r;
    }
  return finish("layer_norm", x.shape(), std::move(out), recording({&x}),
                [xn = x.ptr(), ax, inv_len, rstd = std::move(rstd)](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  for (std::size_t oi = 0; oi < ax.outer; ++oi)
                    for (std::size_t in = 0; in < ax.inner; ++in) {
                      const std::size_t base = oi * ax.len * ax.inner + in;
                      double mg = 0.0, mgy = 0.0;
                      for (std::size_t l = 0; l < ax.len; ++l) {
                        const std::size_t i = base + l * ax.inner;
                        mg += o.grad[i];
                        mgy += o.grad[i] * o.value[i];
                      }
                      mg *= inv_len;
                      mgy *= inv_len;
                      const double r = rstd[oi * ax.inner + in];
                      for (std::size_t l = 0; l < ax.len; ++l) {
                        const std::size_t i = base + l * ax.inner;
                        (*g)[i] += r * (o.grad[i] - mg - o.value[i] * mgy);
                      }
                    }
                });
}

namespace {

Shape drop_axis(const Shape& s, std::size_t axis) {
  Shape out = s;
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  return out;
}

Tensor reduce_sum(const char* op, const Tensor& x, std::size_t axis, double factor) {
  const auto ax = split_axis(x.shape(), axis, op);
  const auto& xv = x.node()->value;
  std::vector<double> out(ax.outer * ax.inner, 0.0);
  for (std::size_t o = 0; o < ax.outer; ++o)
    for (std::size_t l = 0; l < ax.len; ++l) {
      const double* src = xv.data() + (o * ax.len + l) * ax.inner;
      double* dst = out.data() + o * ax.inner;
      for (std::size_t in = 0; in < ax.inner; ++in) dst[in] += src[in];
    }
  if (factor != 1.0)
    for (auto& v : out) v *= factor;
  return finish(op, drop_axis(x.shape(), axis), std::move(out), recording({&x}),
                [xn = x.ptr(), ax, factor](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  for (std::size_t oi = 0; oi < ax.outer; ++oi)
                    for (std::size_t l = 0; l < ax.len; ++l) {
                      double* dst = g->data() + (oi * ax.len + l) * ax.inner;
                      const double* src = o.grad.data() + oi * ax.inner;
                      for (std::size_t in = 0; in < ax.inner; ++in) dst[in] += factor * src[in];
                    }
                });
}

}  // namespace

Tensor sum(const Tensor& x, std::size_t axis) { return reduce_sum("sum", x, axis, 1.0); }

Tensor mean(const Tensor& x, std::size_t axis) {
  const auto ax = split_axis(x.shape(), axis, "mean");
  if (ax.len == 0) shape_error("mean", "empty axis");
  return reduce_sum("mean", x, axis, 1.0 / static_cast<double>(ax.len));
}

Tensor max(const Tensor& x, std::size_t axis) {
  const auto ax = split_axis(x.shape(), axis, "max");
  if (ax.len == 0) shape_error("max", "empty axis");
  const auto& xv = x.node()->value;
  std::vector<double> out(ax.outer * ax.inner);
  std::vector<std::size_t> arg(out.size());
  for (std::size_t o = 0; o < ax.outer; ++o)
    for (std::size_t in = 0; in < ax.inner; ++in) {
      const std::size_t base = o * ax.len * ax.inner + in;
      std::size_t best = base;
      for (std::size_t l = 1; l < ax.len; ++l)
        if (xv[base + l * ax.inner] > xv[best]) best = base + l * ax.inner;
      out[o * ax.inner + in] = xv[best];
      arg[o * ax.inner + in] = best;
    }
  return finish("max", drop_axis(x.shape(), axis), std::move(out), recording({&x}),
                [xn = x.ptr(), arg = std::move(arg)](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  for (std::size_t i = 0; i < arg.size(); ++i) (*g)[arg[i]] += o.grad[i];
                });
}

Tensor sum_all(const Tensor& x) {
  double total = 0.0;
  for (double v : x.node()->value) total += v;
  return finish("sum_all", {}, {total}, recording({&x}), [xn = x.ptr()](Node& o) {
    if (auto* g = grad_of(xn))
      for (auto& v : *g) v += o.grad[0];
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) shape_error("concat", "no inputs");
  const Shape& s0 = parts[0].shape();
  if (axis >= s0.size()) shape_error("concat", "axis out of range");
  Shape out_shape = s0;
  out_shape[axis] = 0;
  std::vector<std::size_t> lens;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    if (s.size() != s0.size()) shape_error("concat", "rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != s0[i]) shape_error("concat", to_string(s) + " vs " + to_string(s0));
    out_shape[axis] += s[axis];
    lens.push_back(s[axis]);
  }
  const auto ax = split_axis(out_shape, axis, "concat");
  std::vector<double> out(numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& pv = parts[p].node()->value;
    const std::size_t chunk = lens[p] * ax.inner;
    for (std::size_t o = 0; o < ax.outer; ++o)
      std::copy_n(pv.data() + o * chunk, chunk, out.data() + o * ax.len * ax.inner + offset);
    offset += chunk;
  }
  std::vector<NodePtr> nodes;
  for (const auto& p : parts) nodes.push_back(p.ptr());
  return finish("concat", std::move(out_shape), std::move(out), recording(parts),
                [nodes = std::move(nodes), lens = std::move(lens), ax](Node& o) {
                  std::size_t off = 0;
                  for (std::size_t p = 0; p < nodes.size(); ++p) {
                    const std::size_t chunk = lens[p] * ax.inner;
                    if (auto* g = grad_of(nodes[p]))
                      for (std::size_t oi = 0; oi < ax.outer; ++oi) {
                        const double* src = o.grad.data() + oi * ax.len * ax.inner + off;
                        double* dst = g->data() + oi * chunk;
                        for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                      }
                    off += chunk;
                  }
                });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto ax = split_axis(x.shape(), axis, "slice");
  if (begin > end || end > ax.len)
    shape_error("slice", "range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis of " +
                             std::to_string(ax.len));
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * ax.inner;
  const auto& xv = x.node()->value;
  std::vector<double> out(ax.outer * chunk);
  for (std::size_t o = 0; o < ax.outer; ++o)
    std::copy_n(xv.data() + (o * ax.len + begin) * ax.inner, chunk, out.data() + o * chunk);
  return finish("slice", std::move(out_shape), std::move(out), recording({&x}),
                [xn = x.ptr(), ax, begin, chunk](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  for (std::size_t oi = 0; oi < ax.outer; ++oi) {
                    double* dst = g->data() + (oi * ax.len + begin) * ax.inner;
                    const double* src = o.grad.data() + oi * chunk;
                    for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                  }
                });
}

namespace {

struct SwapDims {
  std::size_t pre = 1, a = 1, mid = 1, b = 1, post = 1;
};

// Writes x[pre][a][mid][b][post] into out[pre][b][mid][a][post], accumulating
// when `accumulate` is set.
void swap_copy(const SwapDims& d, const double* x, double* out, bool accumulate) {
  for (std::size_t p = 0; p < d.pre; ++p)
    for (std::size_t i = 0; i < d.a; ++i)
      for (std::size_t m = 0; m < d.mid; ++m)
        for (std::size_t j = 0; j < d.b; ++j) {
          const double* src = x + ((((p * d.a + i) * d.mid + m) * d.b + j) * d.post);
          double* dst = out + ((((p * d.b + j) * d.mid + m) * d.a + i) * d.post);
          if (accumulate)
            for (std::size_t q = 0; q < d.post; ++q) dst[q] += src[q];
          else
            std::copy_n(src, d.post, dst);
        }
}

}  // namespace

Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b) {
  const auto& s = x.shape();
  if (axis_a >= s.size() || axis_b >= s.size()) shape_error("transpose", "axis out of range");
  if (axis_a > axis_b) std::swap(axis_a, axis_b);
  SwapDims d;
  for (std::size_t i = 0; i < axis_a; ++i) d.pre *= s[i];
  d.a = s[axis_a];
  for (std::size_t i = axis_a + 1; i < axis_b; ++i) d.mid *= s[i];
  d.b = s[axis_b];
  for (std::size_t i = axis_b + 1; i < s.size(); ++i) d.post *= s[i];
  Shape out_shape = s;
  std::swap(out_shape[axis_a], out_shape[axis_b]);
  std::vector<double> out(x.numel());
  if (axis_a == axis_b)
    out = x.node()->value;
  else
    swap_copy(d, x.node()->value.data(), out.data(), false);
  const bool same = axis_a == axis_b;
  return finish("transpose", std::move(out_shape), std::move(out), recording({&x}),
                [xn = x.ptr(), d, same](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  if (same) {
                    for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i];
                    return;
                  }
                  const SwapDims back{d.pre, d.b, d.mid, d.a, d.post};
                  swap_copy(back, o.grad.data(), g->data(), true);
                });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel())
    shape_error("reshape", to_string(x.shape()) + " -> " + to_string(shape));
  return finish("reshape", std::move(shape), x.node()->value, recording({&x}), [xn = x.ptr()](Node& o) {
    if (auto* g = grad_of(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i];
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::uint32_t> indices) {
  if (table.rank() != 2) shape_error("embedding_lookup", "table must be rank 2");
  const std::size_t rows = table.dim(0), width = table.dim(1);
  const auto& tv = table.node()->value;
  std::vector<double> out(indices.size() * width);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows)
      shape_error("embedding_lookup", "index " + std::to_string(indices[i]) + " >= " + std::to_string(rows));
    std::copy_n(tv.data() + indices[i] * width, width, out.data() + i * width);
  }
  std::vector<std::uint32_t> idx(indices.begin(), indices.end());
  return finish("embedding_lookup", {indices.size(), width}, std::move(out), recording({&table}),
                [tn = table.ptr(), idx = std::move(idx), width](Node& o) {
                  auto* g = grad_of(tn);
                  if (!g) return;
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    double* dst = g->data() + idx[i] * width;
                    const double* src = o.grad.data() + i * width;
                    for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
                  }
                });
}

namespace {

void check_segments(const char* op, const Tensor& x, std::span<const std::uint32_t> segments,
                    std::size_t num_segments) {
  if (x.rank() != 2) shape_error(op, "input must be rank 2");
  if (segments.size() != x.dim(0)) shape_error(op, "one segment id per row required");
  for (auto s : segments)
    if (s >= num_segments) shape_error(op, "segment id out of range");
}

}  // namespace

Tensor segment_softmax(const Tensor& x, std::span<const std::uint32_t> segments,
                       std::size_t num_segments) {
  check_segments("segment_softmax", x, segments, num_segments);
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const auto& xv = x.node()->value;
  std::vector<double> mx(num_segments * cols, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      auto& m = mx[segments[r] * cols + c];
      m = std::max(m, xv[r * cols + c]);
    }
  std::vector<double> out(xv.size());
  std::vector<double> total(num_segments * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = std::exp(xv[r * cols + c] - mx[segments[r] * cols + c]);
      out[r * cols + c] = e;
      total[segments[r] * cols + c] += e;
    }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= total[segments[r] * cols + c];
  std::vector<std::uint32_t> seg(segments.begin(), segments.end());
  return finish("segment_softmax", x.shape(), std::move(out), recording({&x}),
                [xn = x.ptr(), seg = std::move(seg), num_segments, cols](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  std::vector<double> dot(num_segments * cols, 0.0);
                  for (std::size_t r = 0; r < seg.size(); ++r)
                    for (std::size_t c = 0; c < cols; ++c)
                      dot[seg[r] * cols + c] += o.grad[r * cols + c] * o.value[r * cols + c];
                  for (std::size_t r = 0; r < seg.size(); ++r)
                    for (std::size_t c = 0; c < cols; ++c) {
                      const std::size_t i = r * cols + c;
                      (*g)[i] += o.value[i] * (o.grad[i] - dot[seg[r] * cols + c]);
                    }
                });
}

Tensor segment_sum(const Tensor& x, std::span<const std::uint32_t> segments, std::size_t num_segments) {
  check_segments("segment_sum", x, segments, num_segments);
  const std::size_t cols = x.dim(1);
  const auto& xv = x.node()->value;
  std::vector<double> out(num_segments * cols, 0.0);
  for (std::size_t r = 0; r < segments.size(); ++r) {
    double* dst = out.data() + segments[r] * cols;
    const double* src = xv.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
  }
  std::vector<std::uint32_t> seg(segments.begin(), segments.end());
  return finish("segment_sum", {num_segments, cols}, std::move(out), recording({&x}),
                [xn = x.ptr(), seg = std::move(seg), cols](Node& o) {
                  auto* g = grad_of(xn);
                  if (!g) return;
                  for (std::size_t r = 0; r < seg.size(); ++r) {
                    double* dst = g->data() + r * cols;
                    const double* src = o.grad.data() + seg[r] * cols;
                    for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
                  }
                });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw Error(ErrorCode::InvalidConfig, "dropout rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  const auto& xv = x.node()->value;
  std::vector<double> mask(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = keep(rng) ? keep_scale : 0.0;
    out[i] = xv[i] * mask[i];
  }
  return finish("dropout", x.shape(), std::move(out), recording({&x}),
                [xn = x.ptr(), mask = std::move(mask)](Node& o) {
                  if (auto* g = grad_of(xn))
                    for (std::size_t i = 0; i < o.grad.size(); ++i) (*g)[i] += o.grad[i] * mask[i];
                });
}

}  // namespace comet::ad
