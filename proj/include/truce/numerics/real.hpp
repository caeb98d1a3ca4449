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

// Scalar type of every tensor. Release builds use f32; the f64 build of the
// same sources exists for finite-difference gradient checks. Everything that
// depends on the scalar type lives in an inline namespace named after it, so
// both builds can be linked into one program.
#ifdef TRUCE_REAL_DOUBLE
#define TRUCE_PRECISION f64
#else
#define TRUCE_PRECISION f32
#endif

namespace truce::inline TRUCE_PRECISION::num {

#ifdef TRUCE_REAL_DOUBLE
using real = double;
#else
using real = float;
#endif

}  // namespace truce::inline TRUCE_PRECISION::num
