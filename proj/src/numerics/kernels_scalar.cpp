// Copyright 2026 the truce-ts authors
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

#include <cmath>

#include "truce/numerics/kernels.hpp"

namespace truce::inline TRUCE_PRECISION::num::kernels {
namespace {

void gemm_scalar(int m, int n, int k, const real* a, std::ptrdiff_t a_rs, std::ptrdiff_t a_cs,
                 const real* b, int ldb, real* c, int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const real* arow = a + i * a_rs;
    real* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j = 0; j < n; ++j) {
      real s = 0.0f;
      for (int p = 0; p < k; ++p) s += arow[p * a_cs] * b[static_cast<std::ptrdiff_t>(p) * ldb + j];
      crow[j] = accumulate ? crow[j] + s : s;
    }
  }
}

void add_scalar(real* out, const real* a, const real* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(real* out, const real* a, const real* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(real* out, const real* a, const real* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add_inplace_scalar(real* y, const real* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void mul_add_inplace_scalar(real* y, const real* a, const real* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void axpy_scalar(real* y, real alpha, const real* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_inplace_scalar(real* y, real alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

void adam_scalar(real* param, real* m, real* v, const real* grad, std::size_t n,
                 const AdamScalars& s) {
  const real omb1 = 1.0f - s.beta1;
  const real omb2 = 1.0f - s.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const real g = grad[i];
    m[i] = s.beta1 * m[i] + omb1 * g;
    v[i] = s.beta2 * v[i] + (omb2 * g) * g;
    const real mhat = m[i] * s.inv_bias1;
    const real vhat = v[i] * s.inv_bias2;
    param[i] -= (s.lr * mhat) / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",           gemm_scalar, add_scalar,           sub_scalar,
      mul_scalar,         add_inplace_scalar, mul_add_inplace_scalar, axpy_scalar,
      scale_inplace_scalar, adam_scalar,
  };
  return table;
}

void transpose(const real* in, int rows, int cols, real* out) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::ptrdiff_t>(c) * rows + r] = in[static_cast<std::ptrdiff_t>(r) * cols + c];
}

}  // namespace truce::num::kernels
