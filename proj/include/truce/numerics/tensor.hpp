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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "truce/numerics/real.hpp"

namespace truce::inline TRUCE_PRECISION::num {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

// Dense row-major array of 32-bit floats.
//
// Rank-1 tensors behave as a single row; rank-3 tensors (convolution kernels)
// behave as a matrix of shape [d0, d1 * d2] for the linear-algebra kernels.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, real fill = 0.0f);
  Tensor(Shape shape, std::vector<real> values);

  static Tensor scalar(real v) { return Tensor({1, 1}, {v}); }
  static Tensor row(std::vector<real> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  int rows() const;
  int cols() const;

  real* data() { return data_.data(); }
  const real* data() const { return data_.data(); }
  std::span<real> values() { return data_; }
  std::span<const real> values() const { return data_; }
  std::vector<real>& storage() { return data_; }
  const std::vector<real>& storage() const { return data_; }

  real& operator[](std::size_t i) { return data_[i]; }
  real operator[](std::size_t i) const { return data_[i]; }
  real& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  real at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  real item() const;

  void fill(real v);
  // Same storage, new shape with the same element count.
  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<real> data_;
};

// Named learnable tensors, iterated in name order.
using ParameterStore = std::map<std::string, Tensor>;
using GradMap = std::map<std::string, Tensor>;

// Total number of scalar parameters, optionally restricted to a name prefix.
std::size_t count_parameters(const ParameterStore& ps, const std::string& prefix = "");

// g += other, for every entry of other (missing entries are created).
void accumulate(GradMap& into, const GradMap& other);
void scale_grads(GradMap& grads, real factor);

}  // namespace truce::num
