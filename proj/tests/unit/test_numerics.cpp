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

#include <cmath>
#include <cstring>
#include <utility>

#include "gradcheck.hpp"

#include "truce/numerics/adam.hpp"
#include "truce/numerics/ops.hpp"
#include "truce/util/error.hpp"
#include "truce/util/rng.hpp"

using namespace truce;
using namespace truce::num;

using truce::testing::random_tensor;

TEST_CASE("forward primitive examples") {
  Tape tape(false);
  SUBCASE("sigmoid(0) = 0.5") {
    CHECK(sigmoid(tape.constant(Tensor::scalar(0.0f))).value().item() == 0.5f);
  }
  SUBCASE("single-tap identity kernel leaves a sequence unchanged") {
    Tensor x({1, 7}, {3, 1, 4, 1, 5, 9, 2});
    Var out = conv1d(tape.constant(x), tape.constant(Tensor({1, 1, 1}, {1.0f})),
                     tape.constant(Tensor({1, 1}, {0.0f})));
    CHECK(out.value() == x);
  }
  SUBCASE("softmax of equal logits is uniform") {
    Var s = softmax_rows(tape.constant(Tensor::row({2.5f, 2.5f, 2.5f})));
    for (float v : s.value().values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
  }
  SUBCASE("replicate padding repeats the boundary value") {
    // width-3 kernel [1, 0, 0] reads x[t-1], clamped at the left edge
    Var out = conv1d(tape.constant(Tensor({1, 4}, {5, 6, 7, 8})),
                     tape.constant(Tensor({1, 1, 3}, {1, 0, 0})),
                     tape.constant(Tensor({1, 1}, {0.0f})));
    CHECK(out.value().storage() == std::vector<float>{5, 5, 6, 7});
  }
}

TEST_CASE("backward examples") {
  ParameterStore ps{{"w", Tensor::scalar(2.0f)}};
  SUBCASE("linear") {
    Tape tape;
    Var loss = mul(tape.parameter(ps, "w"), tape.constant(Tensor::scalar(3.0f)));
    CHECK(tape.backward(loss).at("w").item() == 3.0f);
  }
  SUBCASE("sigmoid at zero") {
    ps["w"] = Tensor::scalar(0.0f);
    Tape tape;
    Var loss = sigmoid(tape.parameter(ps, "w"));
    CHECK(tape.backward(loss).at("w").item() == 0.25f);
  }
  SUBCASE("unused parameters get zero gradients") {
    ps["unused"] = Tensor({2, 3}, 1.0f);
    Tape tape;
    Var loss = mul(tape.parameter(ps, "w"), tape.parameter(ps, "w"));
    GradMap g = tape.backward(loss, &ps);
    CHECK(g.at("w").item() == 4.0f);
    CHECK(g.at("unused") == Tensor({2, 3}, 0.0f));
  }
}

TEST_CASE("errors") {
  Tape tape;
  ParameterStore ps{{"w", Tensor({2, 3}, 1.0f)}};
  Var w = tape.parameter(ps, "w");
  SUBCASE("shape mismatch names both shapes") {
    try {
      matmul(w, w);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
    }
  }
  SUBCASE("non-scalar loss") { CHECK_THROWS_AS(tape.backward(w), ArgumentError); }
  SUBCASE("non-finite adjoint names the primitive") {
    ParameterStore tiny{{"x", Tensor::scalar(1e-40f)}};
    Tape t2;
    Var loss = log(t2.parameter(tiny, "x"));
    try {
      t2.backward(loss);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("log") != std::string::npos);
    }
  }
  SUBCASE("non-finite forward is rejected") {
    CHECK_THROWS_AS(log(tape.constant(Tensor::scalar(0.0f))), NumericError);
  }
}

TEST_CASE("softmax rows are distributions") {
  Rng rng(3);
  Tape tape(false);
  for (int i = 0; i < 50; ++i) {
    Var s = softmax_rows(tape.constant(random_tensor(rng, {4, 9}, -20.0f, 20.0f)));
    for (int r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (int c = 0; c < 9; ++c) {
        CHECK(s.value().at(r, c) >= 0.0f);
        sum += s.value().at(r, c);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("re-running a computation gives bit-identical outputs") {
  Rng rng(5);
  const Tensor x = random_tensor(rng, {2, 12});
  const Tensor w = random_tensor(rng, {4, 2, 5});
  const Tensor b = random_tensor(rng, {1, 4});
  auto run = [&] {
    Tape t;
    ParameterStore ps{{"w", w}, {"b", b}};
    Var y = sigmoid(conv1d(t.constant(x), t.parameter(ps, "w"), t.parameter(ps, "b")));
    Var loss = sum_all(log_softmax_rows(y));
    return std::make_pair(y.value(), t.backward(loss).at("w"));
  };
  auto [y1, g1] = run();
  auto [y2, g2] = run();
  CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * 4) == 0);
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * 4) == 0);
}

TEST_CASE("adam") {
  SUBCASE("zero gradients leave parameters unchanged") {
    ParameterStore ps{{"p", Tensor::row({1.0f, -2.0f, 3.0f})}};
    const ParameterStore before = ps;
    AdamState st;
    for (int i = 0; i < 3; ++i) adam_step(ps, {{"p", Tensor({1, 3}, 0.0f)}}, st);
    CHECK(ps == before);
    CHECK(st.step == 3);
  }
  SUBCASE("missing gradient is treated as zero") {
    ParameterStore ps{{"p", Tensor::row({1.0f})}};
    AdamState st;
    adam_step(ps, {}, st);
    CHECK(ps.at("p")[0] == 1.0f);
  }
  SUBCASE("first step with unit gradient moves by the learning rate") {
    // t=1: m = 0.1, v = 0.001, mhat = 1, vhat = 1, step = lr / (1 + eps)
    ParameterStore ps{{"p", Tensor::row({0.5f})}};
    AdamState st;
    adam_step(ps, {{"p", Tensor::row({1.0f})}}, st);
    CHECK(0.5 - ps.at("p")[0] == doctest::Approx(1e-4).epsilon(1e-3));
  }
  SUBCASE("constant gradient: update magnitude approaches the learning rate") {
    ParameterStore ps{{"p", Tensor::row({0.0f})}};
    AdamState st(AdamConfig{1e-2f});
    float prev = 0.0f, last_step = 0.0f;
    for (int i = 0; i < 2000; ++i) {
      adam_step(ps, {{"p", Tensor::row({-7.0f})}}, st);
      last_step = ps.at("p")[0] - prev;
      prev = ps.at("p")[0];
    }
    CHECK(last_step == doctest::Approx(1e-2).epsilon(1e-3));
  }
  SUBCASE("shape mismatch") {
    ParameterStore ps{{"p", Tensor::row({0.0f, 1.0f})}};
    AdamState st;
    CHECK_THROWS_AS(adam_step(ps, {{"p", Tensor::row({1.0f})}}, st), ShapeError);
  }
}
