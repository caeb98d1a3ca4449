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

#include <cstdlib>
#include <cstring>

#include <spdlog/spdlog.h>

#include "truce/numerics/kernels.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::num::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(TRUCE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa pick_default() {
  if (const char* env = std::getenv("TRUCE_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
    spdlog::warn("TRUCE_KERNELS={} not usable here; falling back to autodetection", env);
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

const KernelTable& table_for(Isa isa) {
#if defined(TRUCE_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return avx2_table();
#endif
  (void)isa;
  return scalar_table();
}

struct State {
  Isa isa;
  const KernelTable* table;
};

State& state() {
  static State s = [] {
    const Isa isa = pick_default();
    return State{isa, &table_for(isa)};
  }();
  return s;
}

}  // namespace

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& active() { return *state().table; }

Isa active_isa() { return state().isa; }

void set_active(Isa isa) {
  if (!isa_available(isa)) {
    throw ArgumentError("kernel variant " + std::string(isa_name(isa)) + " not supported by this CPU");
  }
  state() = State{isa, &table_for(isa)};
}

}  // namespace truce::num::kernels
