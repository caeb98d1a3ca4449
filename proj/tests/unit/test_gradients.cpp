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

#include <doctest.h>

#include "gradcheck.hpp"
#include "network_gradients.hpp"
#include "truce/numerics/ops.hpp"
#include "truce/util/rng.hpp"

using namespace truce;
using namespace truce::num;
using truce::testing::project;
using truce::testing::random_tensor;

TEST_CASE("every primitive matches central finite differences") {
  struct Case {
    const char* name;
    std::function<Var(Tape&, const ParameterStore&)> fn;
    std::function<ParameterStore(Rng&)> make;
  };
  auto two = [](Shape sa, Shape sb, float lo = -1.0f) {
    return [=](Rng& rng) {
      return ParameterStore{{"a", random_tensor(rng, sa, lo)}, {"b", random_tensor(rng, sb, lo)}};
    };
  };
  auto one = [](Shape sa, float lo = -1.0f, float hi = 1.0f) {
    return [=](Rng& rng) { return ParameterStore{{"a", random_tensor(rng, sa, lo, hi)}}; };
  };
  auto A = [](Tape& t, const ParameterStore& ps) { return t.parameter(ps, "a"); };
  auto B = [](Tape& t, const ParameterStore& ps) { return t.parameter(ps, "b"); };

  const std::vector<Case> cases = {
      {"matmul", [&](Tape& t, auto& ps) { return matmul(A(t, ps), B(t, ps)); }, two({3, 4}, {4, 5})},
      {"transpose", [&](Tape& t, auto& ps) { return transpose(A(t, ps)); }, one({3, 4})},
      {"add", [&](Tape& t, auto& ps) { return add(A(t, ps), B(t, ps)); }, two({3, 4}, {3, 4})},
      {"add_row_bcast", [&](Tape& t, auto& ps) { return add(A(t, ps), B(t, ps)); }, two({3, 4}, {1, 4})},
      {"sub_col_bcast", [&](Tape& t, auto& ps) { return sub(A(t, ps), B(t, ps)); }, two({3, 4}, {3, 1})},
      {"mul", [&](Tape& t, auto& ps) { return mul(A(t, ps), B(t, ps)); }, two({3, 4}, {3, 4})},
      {"mul_scalar_bcast", [&](Tape& t, auto& ps) { return mul(B(t, ps), A(t, ps)); }, two({3, 4}, {1, 1})},
      {"scale", [&](Tape& t, auto& ps) { return scale(A(t, ps), -1.7f); }, one({2, 5})},
      {"add_scalar", [&](Tape& t, auto& ps) { return add_scalar(A(t, ps), 0.3f); }, one({2, 5})},
      {"sigmoid", [&](Tape& t, auto& ps) { return sigmoid(A(t, ps)); }, one({3, 4}, -3.0f, 3.0f)},
      {"tanh", [&](Tape& t, auto& ps) { return num::tanh(A(t, ps)); }, one({3, 4}, -2.0f, 2.0f)},
      {"relu", [&](Tape& t, auto& ps) { return relu(A(t, ps)); },
       [](Rng& rng) {
         // keep inputs off the kink, where the central difference straddles it
         Tensor a = random_tensor(rng, {3, 4});
         for (real& v : a.storage()) v += v < 0 ? -0.01f : 0.01f;
         return ParameterStore{{"a", a}};
       }},
      {"exp", [&](Tape& t, auto& ps) { return num::exp(A(t, ps)); }, one({3, 4})},
      {"log", [&](Tape& t, auto& ps) { return num::log(A(t, ps)); }, one({3, 4}, 0.5f, 2.0f)},
      {"softmax", [&](Tape& t, auto& ps) { return softmax_rows(A(t, ps)); }, one({3, 5}, -2.0f, 2.0f)},
      {"log_softmax", [&](Tape& t, auto& ps) { return log_softmax_rows(A(t, ps)); }, one({3, 5}, -2.0f, 2.0f)},
      {"logsumexp", [&](Tape& t, auto& ps) { return logsumexp_rows(A(t, ps)); }, one({3, 5}, -2.0f, 2.0f)},
      {"reduce_sum0", [&](Tape& t, auto& ps) { return reduce_sum(A(t, ps), 0); }, one({3, 4})},
      {"reduce_mean1", [&](Tape& t, auto& ps) { return reduce_mean(A(t, ps), 1); }, one({3, 4})},
      {"concat_cols", [&](Tape& t, auto& ps) { return concat_cols({A(t, ps), B(t, ps), A(t, ps)}); }, two({2, 3}, {2, 2})},
      {"concat_rows", [&](Tape& t, auto& ps) { return concat_rows({A(t, ps), B(t, ps)}); }, two({2, 3}, {1, 3})},
      {"slice_cols", [&](Tape& t, auto& ps) { return slice_cols(A(t, ps), 1, 4); }, one({2, 5})},
      {"slice_rows", [&](Tape& t, auto& ps) { return slice_rows(A(t, ps), 1, 3); }, one({4, 3})},
      {"reshape", [&](Tape& t, auto& ps) { return reshape(A(t, ps), {1, 10}); }, one({2, 5})},
      {"gather_rows", [&](Tape& t, auto& ps) { return gather_rows(A(t, ps), {2, 0, 2, 1}); }, one({4, 3})},
      {"pick_cols", [&](Tape& t, auto& ps) { return pick_cols(A(t, ps), {0, 3, 1}); }, one({3, 4})},
      {"conv1d", [&](Tape& t, auto& ps) { return conv1d(A(t, ps), B(t, ps), t.parameter(ps, "c")); },
       [](Rng& rng) {
         return ParameterStore{{"a", random_tensor(rng, {2, 7})},
                               {"b", random_tensor(rng, {3, 2, 5})},
                               {"c", random_tensor(rng, {1, 3})}};
       }},
      {"lstm_cell", [&](Tape& t, auto& ps) { return lstm_cell(A(t, ps), B(t, ps)); }, two({2, 12}, {2, 3})},
  };

  for (const Case& c : cases) {
    Rng rng(Rng::derive(11, c.name));
    int failures = 0;
    double worst = 0.0;
    std::string worst_desc;
    for (int inst = 0; inst < 100; ++inst) {
      ParameterStore ps = c.make(rng);
      const std::uint64_t proj_seed = rng.next();
      auto build = [&](Tape& t, const ParameterStore& p) { return project(c.fn(t, p), proj_seed); };
      auto res = testing::grad_check(ps, build);
      failures += res.failed;
      if (res.max_rel > worst) {
        worst = res.max_rel;
        worst_desc = res.worst;
      }
    }
    INFO(std::string(c.name) << " worst " << worst << " at " << worst_desc);
    CHECK(failures == 0);
  }
}

TEST_CASE("randomized 3-layer network gradients match finite differences") {
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(1000 + inst);
    ParameterStore ps{
        {"w1", random_tensor(rng, {6, 8}, -0.5f, 0.5f)}, {"b1", random_tensor(rng, {1, 8})},
        {"w2", random_tensor(rng, {8, 8}, -0.5f, 0.5f)}, {"b2", random_tensor(rng, {1, 8})},
        {"w3", random_tensor(rng, {8, 4}, -0.5f, 0.5f)}, {"b3", random_tensor(rng, {1, 4})},
    };
    const Tensor x = random_tensor(rng, {3, 6});
    const std::vector<int> target{1, 3, 0};
    auto build = [&](Tape& t, const ParameterStore& p) {
      Var h = num::tanh(add(matmul(t.constant(x), t.parameter(p, "w1")), t.parameter(p, "b1")));
      h = sigmoid(add(matmul(h, t.parameter(p, "w2")), t.parameter(p, "b2")));
      Var logits = add(matmul(h, t.parameter(p, "w3")), t.parameter(p, "b3"));
      return scale(sum_all(pick_cols(log_softmax_rows(logits), target)), -1.0f);
    };
    auto res = testing::grad_check(ps, build, 1e-3);
    INFO("worst " << res.max_rel << " at " << res.worst);
    CHECK(res.failed == 0);
  }
}


TEST_CASE("every network matches central finite differences") {
  for (const std::string& net : gradsuite::network_names()) {
    const gradsuite::NetworkResult r = gradsuite::check_network(net, 20, 2024);
    INFO(net << ": worst " << r.max_rel << " at " << r.worst << " (" << r.coordinates << " coordinates, "
              << r.resampled << " resampled)");
    CHECK(r.instances == 20);
    CHECK(r.failed_instances == 0);
  }
}
