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

#include "truce/numerics/tape.hpp"

#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::num {

const Tensor& Var::value() const {
  if (!tape_) throw ArgumentError("use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(const ParameterStore& ps, const std::string& name) {
  if (auto it = param_nodes_.find(name); it != param_nodes_.end()) return Var(this, it->second);
  auto found = ps.find(name);
  if (found == ps.end()) throw ArgumentError("unknown parameter '" + name + "'");
  Node n;
  n.op = "parameter";
  n.value = found->second;
  n.needs_grad = recording_;
  Var v = push(std::move(n));
  param_nodes_.emplace(name, v.id());
  param_order_.emplace_back(name, v.id());
  return v;
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Var Tape::record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite output from primitive '") + op + "'");
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (in.tape() != this) throw ArgumentError(std::string("primitive '") + op + "' mixes tapes");
    n.inputs.push_back(in.id());
    n.needs_grad = n.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Tensor& Tape::grad_mut(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0f);
  return n.grad;
}

GradMap Tape::backward(Var loss, const ParameterStore* all_params) {
  if (loss.tape() != this) throw ArgumentError("loss was not recorded on this tape");
  if (loss.value().size() != 1) {
    throw ArgumentError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!recording_) throw ArgumentError("backward on a tape created without gradient recording");

  grad_mut(loss.id()).fill(1.0f);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
    for (int in : nodes_[id].inputs) {
      const Node& src = nodes_[in];
      if (src.needs_grad && !src.grad.empty() && !src.grad.all_finite()) {
        throw NumericError(std::string("non-finite adjoint produced by primitive '") +
                           nodes_[id].op + "' (node " + std::to_string(id) + ")");
      }
    }
  }

  GradMap grads;
  for (const auto& [name, id] : param_order_) {
    const Node& n = nodes_[id];
    grads.emplace(name, n.grad.empty() ? Tensor(n.value.shape(), 0.0f) : n.grad);
  }
  if (all_params) {
    for (const auto& [name, t] : *all_params)
      if (!grads.count(name)) grads.emplace(name, Tensor(t.shape(), 0.0f));
  }
  return grads;
}

}  // namespace truce::num
