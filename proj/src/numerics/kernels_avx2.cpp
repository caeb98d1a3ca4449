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

#include <immintrin.h>

#include <cmath>

#include "truce/numerics/kernels.hpp"

namespace truce::inline TRUCE_PRECISION::num::kernels {
namespace {

// Scalar tail for columns [j0, n) of rows [i0, i1); same order as the reference.
inline void gemm_tail(int i0, int i1, int j0, int n, int k, const float* a, std::ptrdiff_t a_rs,
                      std::ptrdiff_t a_cs, const float* b, int ldb, float* c, int ldc,
                      bool accumulate) {
  for (int i = i0; i < i1; ++i) {
    const float* arow = a + i * a_rs;
    float* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    for (int j = j0; j < n; ++j) {
      float s = 0.0f;
      for (int p = 0; p < k; ++p) s += arow[p * a_cs] * b[static_cast<std::ptrdiff_t>(p) * ldb + j];
      crow[j] = accumulate ? crow[j] + s : s;
    }
  }
}

inline void store(float* dst, __m256 acc, bool accumulate) {
  if (accumulate) acc = _mm256_add_ps(_mm256_loadu_ps(dst), acc);
  _mm256_storeu_ps(dst, acc);
}

void gemm_avx2(int m, int n, int k, const float* a, std::ptrdiff_t a_rs, std::ptrdiff_t a_cs,
               const float* b, int ldb, float* c, int ldc, bool accumulate) {
  const int n16 = n - n % 16;
  const int n8 = n - n % 8;
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const float* a0 = a + i * a_rs;
    const float* a1 = a0 + a_rs;
    const float* a2 = a1 + a_rs;
    const float* a3 = a2 + a_rs;
    int j = 0;
    for (; j < n16; j += 16) {
      __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
      __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
      __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
      __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
      const float* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const __m256 b0 = _mm256_loadu_ps(bp);
        const __m256 b1 = _mm256_loadu_ps(bp + 8);
        __m256 av = _mm256_set1_ps(a0[p * a_cs]);
        c00 = _mm256_add_ps(c00, _mm256_mul_ps(av, b0));
        c01 = _mm256_add_ps(c01, _mm256_mul_ps(av, b1));
        av = _mm256_set1_ps(a1[p * a_cs]);
        c10 = _mm256_add_ps(c10, _mm256_mul_ps(av, b0));
        c11 = _mm256_add_ps(c11, _mm256_mul_ps(av, b1));
        av = _mm256_set1_ps(a2[p * a_cs]);
        c20 = _mm256_add_ps(c20, _mm256_mul_ps(av, b0));
        c21 = _mm256_add_ps(c21, _mm256_mul_ps(av, b1));
        av = _mm256_set1_ps(a3[p * a_cs]);
        c30 = _mm256_add_ps(c30, _mm256_mul_ps(av, b0));
        c31 = _mm256_add_ps(c31, _mm256_mul_ps(av, b1));
      }
      float* cr = c + static_cast<std::ptrdiff_t>(i) * ldc + j;
      store(cr, c00, accumulate);
      store(cr + 8, c01, accumulate);
      cr += ldc;
      store(cr, c10, accumulate);
      store(cr + 8, c11, accumulate);
      cr += ldc;
      store(cr, c20, accumulate);
      store(cr + 8, c21, accumulate);
      cr += ldc;
      store(cr, c30, accumulate);
      store(cr + 8, c31, accumulate);
    }
    for (; j < n8; j += 8) {
      __m256 c0 = _mm256_setzero_ps(), c1 = _mm256_setzero_ps();
      __m256 c2 = _mm256_setzero_ps(), c3 = _mm256_setzero_ps();
      const float* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const __m256 b0 = _mm256_loadu_ps(bp);
        c0 = _mm256_add_ps(c0, _mm256_mul_ps(_mm256_set1_ps(a0[p * a_cs]), b0));
        c1 = _mm256_add_ps(c1, _mm256_mul_ps(_mm256_set1_ps(a1[p * a_cs]), b0));
        c2 = _mm256_add_ps(c2, _mm256_mul_ps(_mm256_set1_ps(a2[p * a_cs]), b0));
        c3 = _mm256_add_ps(c3, _mm256_mul_ps(_mm256_set1_ps(a3[p * a_cs]), b0));
      }
      float* cr = c + static_cast<std::ptrdiff_t>(i) * ldc + j;
      store(cr, c0, accumulate);
      store(cr + ldc, c1, accumulate);
      store(cr + 2 * ldc, c2, accumulate);
      store(cr + 3 * ldc, c3, accumulate);
    }
    gemm_tail(i, i + 4, n8, n, k, a, a_rs, a_cs, b, ldb, c, ldc, accumulate);
  }
  for (; i < m; ++i) {
    const float* a0 = a + i * a_rs;
    int j = 0;
    for (; j < n16; j += 16) {
      __m256 c0 = _mm256_setzero_ps(), c1 = _mm256_setzero_ps();
      const float* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const __m256 av = _mm256_set1_ps(a0[p * a_cs]);
        c0 = _mm256_add_ps(c0, _mm256_mul_ps(av, _mm256_loadu_ps(bp)));
        c1 = _mm256_add_ps(c1, _mm256_mul_ps(av, _mm256_loadu_ps(bp + 8)));
      }
      float* cr = c + static_cast<std::ptrdiff_t>(i) * ldc + j;
      store(cr, c0, accumulate);
      store(cr + 8, c1, accumulate);
    }
    for (; j < n8; j += 8) {
      __m256 c0 = _mm256_setzero_ps();
      const float* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb)
        c0 = _mm256_add_ps(c0, _mm256_mul_ps(_mm256_set1_ps(a0[p * a_cs]), _mm256_loadu_ps(bp)));
      store(c + static_cast<std::ptrdiff_t>(i) * ldc + j, c0, accumulate);
    }
    gemm_tail(i, i + 1, n8, n, k, a, a_rs, a_cs, b, ldb, c, ldc, accumulate);
  }
}

template <class VecOp, class ScalarOp>
inline void binary(float* out, const float* a, const float* b, std::size_t n, VecOp vop,
                   ScalarOp sop) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, vop(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add_avx2(float* out, const float* a, const float* b, std::size_t n) {
  binary(out, a, b, n, [](__m256 x, __m256 y) { return _mm256_add_ps(x, y); },
         [](float x, float y) { return x + y; });
}

void sub_avx2(float* out, const float* a, const float* b, std::size_t n) {
  binary(out, a, b, n, [](__m256 x, __m256 y) { return _mm256_sub_ps(x, y); },
         [](float x, float y) { return x - y; });
}

void mul_avx2(float* out, const float* a, const float* b, std::size_t n) {
  binary(out, a, b, n, [](__m256 x, __m256 y) { return _mm256_mul_ps(x, y); },
         [](float x, float y) { return x * y; });
}

void add_inplace_avx2(float* y, const float* x, std::size_t n) { add_avx2(y, y, x, n); }

void mul_add_inplace_avx2(float* y, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void axpy_avx2(float* y, float alpha, const float* x, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(av, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_inplace_avx2(float* y, float alpha, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(y + i), av));
  for (; i < n; ++i) y[i] *= alpha;
}

void adam_avx2(float* param, float* m, float* v, const float* grad, std::size_t n,
               const AdamScalars& s) {
  const float omb1 = 1.0f - s.beta1;
  const float omb2 = 1.0f - s.beta2;
  const __m256 b1 = _mm256_set1_ps(s.beta1), b2 = _mm256_set1_ps(s.beta2);
  const __m256 o1 = _mm256_set1_ps(omb1), o2 = _mm256_set1_ps(omb2);
  const __m256 ib1 = _mm256_set1_ps(s.inv_bias1), ib2 = _mm256_set1_ps(s.inv_bias2);
  const __m256 lr = _mm256_set1_ps(s.lr), eps = _mm256_set1_ps(s.eps);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(grad + i);
    __m256 mv = _mm256_add_ps(_mm256_mul_ps(b1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(o1, g));
    __m256 vv = _mm256_add_ps(_mm256_mul_ps(b2, _mm256_loadu_ps(v + i)),
                              _mm256_mul_ps(_mm256_mul_ps(o2, g), g));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(mv, ib1);
    const __m256 vhat = _mm256_mul_ps(vv, ib2);
    const __m256 upd =
        _mm256_div_ps(_mm256_mul_ps(lr, mhat), _mm256_add_ps(_mm256_sqrt_ps(vhat), eps));
    _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), upd));
  }
  for (; i < n; ++i) {
    const float g = grad[i];
    m[i] = s.beta1 * m[i] + omb1 * g;
    v[i] = s.beta2 * v[i] + (omb2 * g) * g;
    const float mhat = m[i] * s.inv_bias1;
    const float vhat = v[i] * s.inv_bias2;
    param[i] -= (s.lr * mhat) / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2",           gemm_avx2, add_avx2,           sub_avx2,
      mul_avx2,         add_inplace_avx2, mul_add_inplace_avx2, axpy_avx2,
      scale_inplace_avx2, adam_avx2,
  };
  return table;
}

}  // namespace truce::num::kernels
