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

#include "truce/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "truce/numerics/kernels.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::num {
namespace {

const kernels::KernelTable& K() { return kernels::active(); }

Tape& tape_of(std::initializer_list<Var> vars) {
  Tape* t = nullptr;
  for (const Var& v : vars) {
    if (!v.valid()) throw ArgumentError("primitive received an unbound Var");
    if (t && v.tape() != t) throw ArgumentError("primitive inputs live on different tapes");
    t = v.tape();
  }
  return *t;
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string("primitive '") + op + "': incompatible shapes " +
                   shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

real sigmoidf(real x) {
  if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
  const real e = std::exp(x);
  return e / (1.0f + e);
}

// Broadcast layout of a binary elementwise op.
struct Broadcast {
  int rows, cols;
  bool same;
  bool a_r1, a_c1, b_r1, b_c1;
};

Broadcast broadcast_of(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return {a.rows(), a.cols(), true, false, false, false, false};
  const int ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  const int R = std::max(ra, rb), C = std::max(ca, cb);
  auto ok = [](int d, int full) { return d == 1 || d == full; };
  if (!ok(ra, R) || !ok(rb, R) || !ok(ca, C) || !ok(cb, C)) shape_fail(op, a, b);
  return {R, C, false, ra == 1 && R > 1, ca == 1 && C > 1, rb == 1 && R > 1, cb == 1 && C > 1};
}

inline std::size_t idx(int r, int c, bool r1, bool c1, int cols) {
  return static_cast<std::size_t>(r1 ? 0 : r) * (c1 ? 1 : cols) + (c1 ? 0 : c);
}

Shape out_shape(const Broadcast& bc, const Tensor& a) {
  return bc.same ? a.shape() : Shape{bc.rows, bc.cols};
}

enum class BinOp { add, sub, mul };

Var binary(const char* name, BinOp kind, Var a, Var b) {
  Tape& tape = tape_of({a, b});
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast bc = broadcast_of(name, av, bv);
  Tensor out(out_shape(bc, av));
  if (bc.same) {
    if (kind == BinOp::add) K().add(out.data(), av.data(), bv.data(), out.size());
    if (kind == BinOp::sub) K().sub(out.data(), av.data(), bv.data(), out.size());
    if (kind == BinOp::mul) K().mul(out.data(), av.data(), bv.data(), out.size());
  } else {
    const int ac = av.cols(), bcn = bv.cols();
    for (int r = 0; r < bc.rows; ++r) {
      for (int c = 0; c < bc.cols; ++c) {
        const real x = av[idx(r, c, bc.a_r1, bc.a_c1, ac)];
        const real y = bv[idx(r, c, bc.b_r1, bc.b_c1, bcn)];
        out[static_cast<std::size_t>(r) * bc.cols + c] =
            kind == BinOp::add ? x + y : kind == BinOp::sub ? x - y : x * y;
      }
    }
  }
  return tape.record(name, std::move(out), {a, b}, [bc, kind](Tape& t, int self) {
    const int ia = t.input(self, 0), ib = t.input(self, 1);
    const Tensor& g = t.grad(self);
    const bool need_a = t.needs_grad(ia), need_b = t.needs_grad(ib);
    if (bc.same) {
      if (need_a) {
        Tensor& ga = t.grad_mut(ia);
        if (kind == BinOp::mul) K().mul_add_inplace(ga.data(), g.data(), t.value(ib).data(), g.size());
        else K().add_inplace(ga.data(), g.data(), g.size());
      }
      if (need_b) {
        Tensor& gb = t.grad_mut(ib);
        if (kind == BinOp::mul) K().mul_add_inplace(gb.data(), g.data(), t.value(ia).data(), g.size());
        else if (kind == BinOp::sub) K().axpy(gb.data(), -1.0f, g.data(), g.size());
        else K().add_inplace(gb.data(), g.data(), g.size());
      }
      return;
    }
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    const int ac = av.cols(), bcn = bv.cols();
    Tensor* ga = need_a ? &t.grad_mut(ia) : nullptr;
    Tensor* gb = need_b ? &t.grad_mut(ib) : nullptr;
    for (int r = 0; r < bc.rows; ++r) {
      for (int c = 0; c < bc.cols; ++c) {
        const real go = g[static_cast<std::size_t>(r) * bc.cols + c];
        const std::size_t ka = idx(r, c, bc.a_r1, bc.a_c1, ac);
        const std::size_t kb = idx(r, c, bc.b_r1, bc.b_c1, bcn);
        if (ga) (*ga)[ka] += kind == BinOp::mul ? go * bv[kb] : go;
        if (gb) (*gb)[kb] += kind == BinOp::mul ? go * av[ka] : kind == BinOp::sub ? -go : go;
      }
    }
  });
}

template <class Fwd, class Deriv>
Var unary(const char* name, Var a, Fwd fwd, Deriv deriv) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  // deriv(x, y) is dy/dx given input x and output y.
  return tape.record(name, std::move(out), {a}, [deriv](Tape& t, int self) {
    const int ia = t.input(self, 0);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_mut(ia);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of({a, b});
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const int m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) shape_fail("matmul", av, bv);
  Tensor out({m, n});
  K().gemm(m, n, k, av.data(), k, 1, bv.data(), n, out.data(), n, false);
  return tape.record("matmul", std::move(out), {a, b}, [m, k, n](Tape& t, int self) {
    const int ia = t.input(self, 0), ib = t.input(self, 1);
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ia)) {
      // dA += dC * B^T
      const Tensor& bv = t.value(ib);
      std::vector<real> bt(static_cast<std::size_t>(n) * k);
      kernels::transpose(bv.data(), k, n, bt.data());
      K().gemm(m, k, n, g.data(), n, 1, bt.data(), k, t.grad_mut(ia).data(), k, true);
    }
    if (t.needs_grad(ib)) {
      // dB += A^T * dC
      const Tensor& av = t.value(ia);
      K().gemm(k, n, m, av.data(), 1, k, g.data(), n, t.grad_mut(ib).data(), n, true);
    }
  });
}

Var transpose(Var a) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int r = av.rows(), c = av.cols();
  Tensor out({c, r});
  kernels::transpose(av.data(), r, c, out.data());
  return tape.record("transpose", std::move(out), {a}, [r, c](Tape& t, int self) {
    const int ia = t.input(self, 0);
    const Tensor& g = t.grad(self);
    std::vector<real> back(static_cast<std::size_t>(r) * c);
    kernels::transpose(g.data(), c, r, back.data());
    K().add_inplace(t.grad_mut(ia).data(), back.data(), back.size());
  });
}

Var add(Var a, Var b) { return binary("add", BinOp::add, a, b); }
Var sub(Var a, Var b) { return binary("sub", BinOp::sub, a, b); }
Var mul(Var a, Var b) { return binary("mul", BinOp::mul, a, b); }

Var scale(Var a, real factor) {
  Tape& tape = tape_of({a});
  Tensor out = a.value();
  K().scale_inplace(out.data(), factor, out.size());
  return tape.record("scale", std::move(out), {a}, [factor](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    K().axpy(t.grad_mut(t.input(self, 0)).data(), factor, g.data(), g.size());
  });
}

Var add_scalar(Var a, real c) {
  Tape& tape = tape_of({a});
  Tensor out = a.value();
  for (real& v : out.storage()) v += c;
  return tape.record("add_scalar", std::move(out), {a}, [](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    K().add_inplace(t.grad_mut(t.input(self, 0)).data(), g.data(), g.size());
  });
}

Var sigmoid(Var a) {
  return unary("sigmoid", a, sigmoidf, [](real, real y) { return y * (1.0f - y); });
}

Var tanh(Var a) {
  return unary("tanh", a, [](real x) { return std::tanh(x); },
               [](real, real y) { return 1.0f - y * y; });
}

Var relu(Var a) {
  return unary("relu", a, [](real x) { return x > 0.0f ? x : 0.0f; },
               [](real x, real) { return x > 0.0f ? 1.0f : 0.0f; });
}

Var exp(Var a) {
  return unary("exp", a, [](real x) { return std::exp(x); }, [](real, real y) { return y; });
}

Var log(Var a) {
  return unary("log", a, [](real x) { return std::log(x); },
               [](real x, real) { return 1.0f / x; });
}

Var softmax_rows(Var a) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  Tensor out(av.shape());
  for (int r = 0; r < m; ++r) {
    const real* x = av.data() + static_cast<std::size_t>(r) * n;
    real* y = out.data() + static_cast<std::size_t>(r) * n;
    const real mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(x[c] - mx));
    for (int c = 0; c < n; ++c) y[c] = static_cast<real>(std::exp(static_cast<double>(x[c] - mx)) / z);
  }
  return tape.record("softmax", std::move(out), {a}, [m, n](Tape& t, int self) {
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_mut(t.input(self, 0));
    for (int r = 0; r < m; ++r) {
      const std::size_t o = static_cast<std::size_t>(r) * n;
      double dot = 0.0;
      for (int c = 0; c < n; ++c) dot += static_cast<double>(g[o + c]) * y[o + c];
      for (int c = 0; c < n; ++c) gx[o + c] += y[o + c] * static_cast<real>(g[o + c] - dot);
    }
  });
}

Var log_softmax_rows(Var a) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  Tensor out(av.shape());
  for (int r = 0; r < m; ++r) {
    const real* x = av.data() + static_cast<std::size_t>(r) * n;
    real* y = out.data() + static_cast<std::size_t>(r) * n;
    const real mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(x[c] - mx));
    const double lz = mx + std::log(z);
    for (int c = 0; c < n; ++c) y[c] = static_cast<real>(x[c] - lz);
  }
  return tape.record("log_softmax", std::move(out), {a}, [m, n](Tape& t, int self) {
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_mut(t.input(self, 0));
    for (int r = 0; r < m; ++r) {
      const std::size_t o = static_cast<std::size_t>(r) * n;
      double gs = 0.0;
      for (int c = 0; c < n; ++c) gs += g[o + c];
      for (int c = 0; c < n; ++c)
        gx[o + c] += g[o + c] - static_cast<real>(std::exp(static_cast<double>(y[o + c])) * gs);
    }
  });
}

Var logsumexp_rows(Var a) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  Tensor out({m, 1});
  for (int r = 0; r < m; ++r) {
    const real* x = av.data() + static_cast<std::size_t>(r) * n;
    const real mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(x[c] - mx));
    out[r] = static_cast<real>(mx + std::log(z));
  }
  return tape.record("logsumexp", std::move(out), {a}, [m, n](Tape& t, int self) {
    const int ia = t.input(self, 0);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_mut(ia);
    for (int r = 0; r < m; ++r) {
      const std::size_t o = static_cast<std::size_t>(r) * n;
      for (int c = 0; c < n; ++c)
        gx[o + c] += g[r] * static_cast<real>(std::exp(static_cast<double>(x[o + c]) - y[r]));
    }
  });
}

Var reduce_sum(Var a, int axis) {
  if (axis != 0 && axis != 1) throw ArgumentError("reduce axis must be 0 or 1");
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  Tensor out(axis == 0 ? Shape{1, n} : Shape{m, 1});
  if (axis == 0) {
    std::vector<double> acc(n, 0.0);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) acc[c] += av[static_cast<std::size_t>(r) * n + c];
    for (int c = 0; c < n; ++c) out[c] = static_cast<real>(acc[c]);
  } else {
    for (int r = 0; r < m; ++r) {
      double acc = 0.0;
      for (int c = 0; c < n; ++c) acc += av[static_cast<std::size_t>(r) * n + c];
      out[r] = static_cast<real>(acc);
    }
  }
  return tape.record("reduce_sum", std::move(out), {a}, [m, n, axis](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad_mut(t.input(self, 0));
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) gx[static_cast<std::size_t>(r) * n + c] += g[axis == 0 ? c : r];
  });
}

Var reduce_mean(Var a, int axis) {
  const int count = axis == 0 ? a.rows() : a.cols();
  return scale(reduce_sum(a, axis), 1.0f / static_cast<real>(count));
}

Var sum_all(Var a) {
  return reshape(reduce_sum(reshape(a, {1, static_cast<int>(a.value().size())}), 1), {1, 1});
}

namespace {

struct Widths {
  std::vector<int> sizes;
  int total = 0;
};

Widths check_parts(const char* op, const std::vector<Var>& parts, bool by_cols) {
  if (parts.empty()) throw ArgumentError(std::string(op) + " of nothing");
  Widths w;
  const Var& first = parts.front();
  for (const Var& p : parts) {
    if (!p.valid() || p.tape() != first.tape())
      throw ArgumentError(std::string(op) + " inputs live on different tapes");
    const bool ok = by_cols ? p.rows() == first.rows() : p.cols() == first.cols();
    if (!ok) shape_fail(op, first.value(), p.value());
    const int s = by_cols ? p.cols() : p.rows();
    w.sizes.push_back(s);
    w.total += s;
  }
  return w;
}

}  // namespace

Var concat_cols(const std::vector<Var>& parts) {
  const Widths w = check_parts("concat_cols", parts, true);
  Tape& tape = *parts.front().tape();
  const int m = parts.front().rows();
  Tensor out({m, w.total});
  int off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (int r = 0; r < m; ++r)
      std::copy_n(v.data() + static_cast<std::size_t>(r) * w.sizes[k], w.sizes[k],
                  out.data() + static_cast<std::size_t>(r) * w.total + off);
    off += w.sizes[k];
  }
  return tape.record("concat_cols", std::move(out), parts, [w, m](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    int off = 0;
    for (std::size_t k = 0; k < w.sizes.size(); ++k) {
      const int in = t.input(self, static_cast<int>(k));
      if (t.needs_grad(in)) {
        Tensor& gi = t.grad_mut(in);
        for (int r = 0; r < m; ++r)
          K().add_inplace(gi.data() + static_cast<std::size_t>(r) * w.sizes[k],
                          g.data() + static_cast<std::size_t>(r) * w.total + off, w.sizes[k]);
      }
      off += w.sizes[k];
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  const Widths w = check_parts("concat_rows", parts, false);
  Tape& tape = *parts.front().tape();
  const int n = parts.front().cols();
  Tensor out({w.total, n});
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy_n(p.value().data(), p.value().size(), out.data() + off);
    off += p.value().size();
  }
  return tape.record("concat_rows", std::move(out), parts, [w, n](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < w.sizes.size(); ++k) {
      const int in = t.input(self, static_cast<int>(k));
      const std::size_t len = static_cast<std::size_t>(w.sizes[k]) * n;
      if (t.needs_grad(in)) K().add_inplace(t.grad_mut(in).data(), g.data() + off, len);
      off += len;
    }
  });
}

Var slice_cols(Var a, int begin, int end) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  if (begin < 0 || end > n || begin >= end) {
    throw ShapeError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for shape " + shape_str(av.shape()));
  }
  const int w = end - begin;
  Tensor out({m, w});
  for (int r = 0; r < m; ++r)
    std::copy_n(av.data() + static_cast<std::size_t>(r) * n + begin, w,
                out.data() + static_cast<std::size_t>(r) * w);
  return tape.record("slice_cols", std::move(out), {a}, [m, n, begin, w](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(t.input(self, 0));
    for (int r = 0; r < m; ++r)
      K().add_inplace(ga.data() + static_cast<std::size_t>(r) * n + begin,
                      g.data() + static_cast<std::size_t>(r) * w, w);
  });
}

Var slice_rows(Var a, int begin, int end) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  if (begin < 0 || end > m || begin >= end) {
    throw ShapeError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for shape " + shape_str(av.shape()));
  }
  const std::size_t off = static_cast<std::size_t>(begin) * n;
  const std::size_t len = static_cast<std::size_t>(end - begin) * n;
  Tensor out({end - begin, n});
  std::copy_n(av.data() + off, len, out.data());
  return tape.record("slice_rows", std::move(out), {a}, [off, len](Tape& t, int self) {
    K().add_inplace(t.grad_mut(t.input(self, 0)).data() + off, t.grad(self).data(), len);
  });
}

Var reshape(Var a, Shape shape) {
  Tape& tape = tape_of({a});
  Tensor out = a.value().reshaped(std::move(shape));
  return tape.record("reshape", std::move(out), {a}, [](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    K().add_inplace(t.grad_mut(t.input(self, 0)).data(), g.data(), g.size());
  });
}

Var gather_rows(Var table, const std::vector<int>& ids) {
  Tape& tape = tape_of({table});
  const Tensor& tv = table.value();
  const int v = tv.rows(), d = tv.cols();
  if (ids.empty()) throw ArgumentError("gather_rows with no ids");
  Tensor out({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= v) {
      throw ShapeError("gather_rows id " + std::to_string(ids[i]) + " out of range for table " +
                       shape_str(tv.shape()));
    }
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  return tape.record("gather_rows", std::move(out), {table}, [ids, d](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& gt = t.grad_mut(t.input(self, 0));
    for (std::size_t i = 0; i < ids.size(); ++i)
      K().add_inplace(gt.data() + static_cast<std::size_t>(ids[i]) * d, g.data() + i * d, d);
  });
}

Var pick_cols(Var a, const std::vector<int>& cols) {
  Tape& tape = tape_of({a});
  const Tensor& av = a.value();
  const int m = av.rows(), n = av.cols();
  if (static_cast<int>(cols.size()) != m) {
    throw ShapeError("pick_cols needs one column per row: " + std::to_string(cols.size()) +
                     " for shape " + shape_str(av.shape()));
  }
  Tensor out({m, 1});
  for (int r = 0; r < m; ++r) {
    if (cols[r] < 0 || cols[r] >= n)
      throw ShapeError("pick_cols column " + std::to_string(cols[r]) + " out of range");
    out[r] = av[static_cast<std::size_t>(r) * n + cols[r]];
  }
  return tape.record("pick_cols", std::move(out), {a}, [cols, n](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(t.input(self, 0));
    for (std::size_t r = 0; r < cols.size(); ++r) ga[r * n + cols[r]] += g[r];
  });
}

namespace {

// cols[(ci * K + k) * T + t] = x[ci, clamp(t + k - K/2)]
void im2col(const Tensor& x, int kw, std::vector<real>& cols) {
  const int ci = x.rows(), T = x.cols(), pad = kw / 2;
  cols.resize(static_cast<std::size_t>(ci) * kw * T);
  for (int c = 0; c < ci; ++c)
    for (int k = 0; k < kw; ++k)
      for (int t = 0; t < T; ++t) {
        const int src = std::clamp(t + k - pad, 0, T - 1);
        cols[(static_cast<std::size_t>(c) * kw + k) * T + t] = x[static_cast<std::size_t>(c) * T + src];
      }
}

}  // namespace

Var conv1d(Var x, Var w, Var b) {
  Tape& tape = tape_of({x, w, b});
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (wv.rank() != 3) throw ShapeError("conv1d kernel must be [c_out x c_in x K], got " + shape_str(wv.shape()));
  const int co = wv.shape()[0], ci = wv.shape()[1], kw = wv.shape()[2];
  const int T = xv.cols();
  if (xv.rows() != ci) shape_fail("conv1d", xv, wv);
  if (kw % 2 == 0) throw ShapeError("conv1d kernel width must be odd, got " + std::to_string(kw));
  if (static_cast<int>(bv.size()) != co) shape_fail("conv1d", wv, bv);
  std::vector<real> cols;
  im2col(xv, kw, cols);
  const int ck = ci * kw;
  Tensor out({co, T});
  K().gemm(co, T, ck, wv.data(), ck, 1, cols.data(), T, out.data(), T, false);
  for (int o = 0; o < co; ++o)
    for (int t = 0; t < T; ++t) out[static_cast<std::size_t>(o) * T + t] += bv[o];
  return tape.record("conv1d", std::move(out), {x, w, b}, [co, ci, kw, T, ck](Tape& t, int self) {
    const int ix = t.input(self, 0), iw = t.input(self, 1), ib = t.input(self, 2);
    const Tensor& g = t.grad(self);
    if (t.needs_grad(iw)) {
      // dW += dOut * cols^T
      std::vector<real> cols, cols_t(static_cast<std::size_t>(ck) * T);
      im2col(t.value(ix), kw, cols);
      kernels::transpose(cols.data(), ck, T, cols_t.data());
      K().gemm(co, ck, T, g.data(), T, 1, cols_t.data(), ck, t.grad_mut(iw).data(), ck, true);
    }
    if (t.needs_grad(ib)) {
      Tensor& gb = t.grad_mut(ib);
      for (int o = 0; o < co; ++o) {
        double acc = 0.0;
        for (int s = 0; s < T; ++s) acc += g[static_cast<std::size_t>(o) * T + s];
        gb[o] += static_cast<real>(acc);
      }
    }
    if (t.needs_grad(ix)) {
      // dcols = W^T * dOut, then scatter back through the replicate padding.
      const Tensor& wv = t.value(iw);
      std::vector<real> dcols(static_cast<std::size_t>(ck) * T);
      K().gemm(ck, T, co, wv.data(), 1, ck, g.data(), T, dcols.data(), T, false);
      Tensor& gx = t.grad_mut(ix);
      const int pad = kw / 2;
      for (int c = 0; c < ci; ++c)
        for (int k = 0; k < kw; ++k)
          for (int s = 0; s < T; ++s) {
            const int src = std::clamp(s + k - pad, 0, T - 1);
            gx[static_cast<std::size_t>(c) * T + src] += dcols[(static_cast<std::size_t>(c) * kw + k) * T + s];
          }
    }
  });
}

Var lstm_cell(Var gates, Var c_prev) {
  Tape& tape = tape_of({gates, c_prev});
  const Tensor& gv = gates.value();
  const Tensor& cv = c_prev.value();
  const int m = gv.rows(), H = cv.cols();
  if (gv.cols() != 4 * H || cv.rows() != m) shape_fail("lstm_cell", gv, cv);
  Tensor out({m, 2 * H});
  for (int r = 0; r < m; ++r) {
    const real* g = gv.data() + static_cast<std::size_t>(r) * 4 * H;
    const real* cp = cv.data() + static_cast<std::size_t>(r) * H;
    real* h = out.data() + static_cast<std::size_t>(r) * 2 * H;
    real* c = h + H;
    for (int j = 0; j < H; ++j) {
      const real ig = sigmoidf(g[j]);
      const real fg = sigmoidf(g[H + j]);
      const real cg = std::tanh(g[2 * H + j]);
      const real og = sigmoidf(g[3 * H + j]);
      c[j] = fg * cp[j] + ig * cg;
      h[j] = og * std::tanh(c[j]);
    }
  }
  return tape.record("lstm_cell", std::move(out), {gates, c_prev}, [m, H](Tape& t, int self) {
    const int ig_id = t.input(self, 0), ic_id = t.input(self, 1);
    const Tensor& gv = t.value(ig_id);
    const Tensor& cv = t.value(ic_id);
    const Tensor& out = t.value(self);
    const Tensor& go = t.grad(self);
    Tensor* dgates = t.needs_grad(ig_id) ? &t.grad_mut(ig_id) : nullptr;
    Tensor* dcprev = t.needs_grad(ic_id) ? &t.grad_mut(ic_id) : nullptr;
    for (int r = 0; r < m; ++r) {
      const real* g = gv.data() + static_cast<std::size_t>(r) * 4 * H;
      const real* cp = cv.data() + static_cast<std::size_t>(r) * H;
      const real* c = out.data() + static_cast<std::size_t>(r) * 2 * H + H;
      const real* dh = go.data() + static_cast<std::size_t>(r) * 2 * H;
      const real* dc_out = dh + H;
      for (int j = 0; j < H; ++j) {
        const real ig = sigmoidf(g[j]);
        const real fg = sigmoidf(g[H + j]);
        const real cg = std::tanh(g[2 * H + j]);
        const real og = sigmoidf(g[3 * H + j]);
        const real th = std::tanh(c[j]);
        const real dc = dc_out[j] + dh[j] * og * (1.0f - th * th);
        if (dgates) {
          real* dg = dgates->data() + static_cast<std::size_t>(r) * 4 * H;
          dg[j] += dc * cg * ig * (1.0f - ig);
          dg[H + j] += dc * cp[j] * fg * (1.0f - fg);
          dg[2 * H + j] += dc * ig * (1.0f - cg * cg);
          dg[3 * H + j] += dh[j] * th * og * (1.0f - og);
        }
        if (dcprev) (*dcprev)[static_cast<std::size_t>(r) * H + j] += dc * fg;
      }
    }
  });
}

}  // namespace truce::num
