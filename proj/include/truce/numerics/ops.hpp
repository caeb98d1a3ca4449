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

#include <vector>

#include "truce/numerics/tape.hpp"

// Differentiable primitives. Every function records its output on the tape
// of its inputs. Binary elementwise ops broadcast an operand with one row
// and/or one column against the other operand's shape.
namespace truce::inline TRUCE_PRECISION::num {

Var matmul(Var a, Var b);  // [m x k] * [k x n]
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, real factor);
Var add_scalar(Var a, real c);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);

// Row-wise normalizations over the column axis.
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
Var logsumexp_rows(Var a);  // -> [m x 1]

// axis 0 reduces over rows (-> [1 x n]); axis 1 over columns (-> [m x 1]).
Var reduce_sum(Var a, int axis);
Var reduce_mean(Var a, int axis);
Var sum_all(Var a);  // -> [1 x 1]

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, int begin, int end);
Var slice_rows(Var a, int begin, int end);
Var reshape(Var a, Shape shape);

// Embedding lookup: rows of table[ids[i]] -> [ids.size() x d].
Var gather_rows(Var table, const std::vector<int>& ids);
// out[i] = a[i, cols[i]] -> [m x 1].
Var pick_cols(Var a, const std::vector<int>& cols);

// Same-length 1-D convolution with replicate-edge padding.
// x: [c_in x T], w: [c_out x c_in x K] (K odd), b: [1 x c_out] -> [c_out x T].
Var conv1d(Var x, Var w, Var b);

// Fused LSTM cell. gates: [m x 4H] in (input, forget, cell, output) order,
// c_prev: [m x H]. Returns [m x 2H] = (h | c).
Var lstm_cell(Var gates, Var c_prev);

}  // namespace truce::num
