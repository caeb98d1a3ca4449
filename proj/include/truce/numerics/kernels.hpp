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

#pragma once

#include <cstddef>
#include <string_view>

#include "truce/numerics/real.hpp"

// Data-parallel inner loops behind the tensor ops.
//
// Every kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2 variant chosen at runtime. Variants keep the scalar
// accumulation order (each output is summed over the reduction index in
// increasing order, products are rounded before the add), so all variants
// are bit-identical; tests assert exact equality.
namespace truce::inline TRUCE_PRECISION::num::kernels {

enum class Isa { scalar, avx2 };

struct AdamScalars {
  real lr;
  real beta1;
  real beta2;
  real eps;
  real inv_bias1;  // 1 / (1 - beta1^t)
  real inv_bias2;  // 1 / (1 - beta2^t)
};

struct KernelTable {
  const char* name;

  // C[m x n] = A * B (or C += A * B when accumulate). Element (i, p) of A is
  // a[i * a_rs + p * a_cs], so both A and A^T can be passed without copying.
  // B is row-major [k x n] with leading dimension ldb; C has leading dimension ldc.
  void (*gemm)(int m, int n, int k, const real* a, std::ptrdiff_t a_rs, std::ptrdiff_t a_cs,
               const real* b, int ldb, real* c, int ldc, bool accumulate);

  void (*add)(real* out, const real* a, const real* b, std::size_t n);
  void (*sub)(real* out, const real* a, const real* b, std::size_t n);
  void (*mul)(real* out, const real* a, const real* b, std::size_t n);
  // y += x
  void (*add_inplace)(real* y, const real* x, std::size_t n);
  // y += a * b
  void (*mul_add_inplace)(real* y, const real* a, const real* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(real* y, real alpha, const real* x, std::size_t n);
  // y *= alpha
  void (*scale_inplace)(real* y, real alpha, std::size_t n);
  // One Adam update over a flat parameter block.
  void (*adam)(real* param, real* m, real* v, const real* grad, std::size_t n,
               const AdamScalars& s);
};

const KernelTable& scalar_table();
#if defined(TRUCE_HAVE_AVX2_TU)
const KernelTable& avx2_table();
#endif

bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);

// Table in use. Chosen on first call: AVX2 when the CPU supports it, unless
// the environment variable TRUCE_KERNELS=scalar forces the reference path.
const KernelTable& active();
Isa active_isa();
void set_active(Isa isa);

// Switches the active table for the lifetime of the guard (tests only;
// not thread-safe).
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active(isa); }
  ~ScopedIsa() { set_active(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// out[c * rows + r] = in[r * cols + c]
void transpose(const real* in, int rows, int cols, real* out);

}  // namespace truce::num::kernels
