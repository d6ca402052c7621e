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

#include "gemm.hpp"

#include <algorithm>

#include <cblas.h>

#include "comet/parallel.hpp"

extern "C" void openblas_set_num_threads(int);

namespace comet::ad::detail {

namespace {

constexpr std::size_t kRowChunk = 256;
constexpr std::size_t kSmallWork = 8192;

struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};

void naive(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
           std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
           std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (beta == 0.0)
      std::fill(crow, crow + n, 0.0);
    else if (beta != 1.0)
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ta ? a[p * lda + i] : a[i * lda + p];
      if (tb) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * ldb + p];
      } else {
        const double* brow = b + p * ldb;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

void blas(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
          std::size_t ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

}  // namespace

void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
          std::size_t ldc) {
  static const BlasInit init;
  if (m == 0 || n == 0) return;
  if (k == 0) {
    naive(ta, tb, m, n, 0, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  if (m * n * k <= kSmallWork) {
    naive(ta, tb, m, n, k, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  if (m <= kRowChunk) {
    blas(ta, tb, m, n, k, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  parallel_for(m, kRowChunk, [&](std::size_t r0, std::size_t r1) {
    const double* ablk = ta ? a + r0 : a + r0 * lda;
    blas(ta, tb, r1 - r0, n, k, ablk, lda, b, ldb, beta, c + r0 * ldc, ldc);
  });
}

}  // namespace comet::ad::detail
