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

#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "truce/numerics/tensor.hpp"

namespace truce::inline TRUCE_PRECISION::num {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records primitive applications in execution order so reverse-mode
// gradients can be accumulated by one backward sweep.
//
// A tape is single-threaded. Parameters are copied in as leaves; gradients
// are reported per parameter name.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  // With record_gradients == false the tape only evaluates (no adjoint state).
  explicit Tape(bool record_gradients = true) : recording_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to ps[name]; repeated requests for the same name share one leaf.
  Var parameter(const ParameterStore& ps, const std::string& name);

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  // Gradients of a scalar loss with respect to every parameter leaf on this
  // tape. When `all_params` is given, parameters it holds that were never
  // used get zero gradients.
  GradMap backward(Var loss, const ParameterStore* all_params = nullptr);

  // --- interface for primitive implementations ---
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn fn);
  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  // Adjoint of node `id`, zero-initialized on first access.
  Tensor& grad_mut(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  int input(int self, int k) const { return nodes_[self].inputs[k]; }
  const char* op_name(int id) const { return nodes_[id].op; }

 private:
  struct Node {
    const char* op = "";
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    bool needs_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  bool recording_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_nodes_;
  std::vector<std::pair<std::string, int>> param_order_;
};

}  // namespace truce::num
