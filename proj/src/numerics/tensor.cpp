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

#include "truce/numerics/tensor.hpp"

#include <cmath>
#include <sstream>

#include "truce/numerics/kernels.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::num {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, real fill) : shape_(std::move(shape)) {
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<real> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " +
                     shape_str(shape_));
  }
}

Tensor Tensor::row(std::vector<real> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({1, n}, std::move(values));
}

int Tensor::rows() const {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? 1 : shape_[0];
}

int Tensor::cols() const {
  if (shape_.empty()) return 0;
  if (shape_.size() == 1) return shape_[0];
  return static_cast<int>(data_.size() / static_cast<std::size_t>(shape_[0]));
}

real Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  return data_[0];
}

void Tensor::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  for (real v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::size_t count_parameters(const ParameterStore& ps, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& [name, t] : ps)
    if (name.compare(0, prefix.size(), prefix) == 0) n += t.size();
  return n;
}

void accumulate(GradMap& into, const GradMap& other) {
  for (const auto& [name, g] : other) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, g);
      continue;
    }
    if (it->second.shape() != g.shape()) {
      throw ShapeError("gradient shape mismatch for " + name + ": " + shape_str(it->second.shape()) +
                       " vs " + shape_str(g.shape()));
    }
    kernels::active().add_inplace(it->second.data(), g.data(), g.size());
  }
}

void scale_grads(GradMap& grads, real factor) {
  for (auto& [name, g] : grads) kernels::active().scale_inplace(g.data(), factor, g.size());
}

}  // namespace truce::num
