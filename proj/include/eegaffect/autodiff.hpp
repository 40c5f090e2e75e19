#pragma once

// Minimal reverse-mode differentiation over dense real tensors. The tape is
// define-by-run and rebuilt per batch: recording an op appends a node holding
// the output value plus forward/backward closures. Creation order is already
// a topological order, so backward() is a single reverse sweep and replay()
// a single forward sweep. A tape is single-threaded; run parallel work on
// separate tapes over disjoint parameter copies.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "eegaffect/error.hpp"

namespace eegaffect::ad {

using Shape = std::vector<int>;

inline int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), T(0)) {}
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != shape_numel(shape)) {
      fail("shape_mismatch", "tensor data size does not match shape " + shape_str(shape));
    }
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rows() const { return shape.size() >= 1 ? shape[0] : 1; }
  int cols() const { return shape.size() >= 2 ? shape[1] : 1; }
  // size of the trailing dimension (softmax/concat/slice axis)
  int last_dim() const { return shape.empty() ? 1 : shape.back(); }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }
};

template <typename T>
inline void debug_check_finite(const Tensor<T>& t) {
#ifndef NDEBUG
  for (T v : t.data) assert(std::isfinite(static_cast<double>(v)) && "non-finite tensor element");
#else
  (void)t;
#endif
}

// Trainable tensor: value + gradient accumulator. `decay` marks whether
// decoupled weight decay applies (off for biases).
template <typename T>
struct Parameter {
  Tensor<T> value;
  Tensor<T> grad;
  int id = -1;
  bool decay = true;
  std::string name;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v, bool apply_decay = true)
      : value(std::move(v)), grad(value.shape), decay(apply_decay), name(std::move(n)) {}

  void zero_grad() { grad.zero(); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Tape {
 public:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;                        // allocated lazily by backward()
    std::function<void(Tape&)> forward;    // recompute value from inputs; null for leaves
    std::function<void(Tape&)> backward;   // scatter grad into inputs; null for constants
  };

  // Constant leaf (inputs, masks): participates in forward/replay only.
  Var leaf(Tensor<T> value) {
    return emplace(std::move(value), nullptr, nullptr);
  }

  // Leaf bound to a parameter. Backward adds the node gradient into
  // p.grad, so reusing one parameter across several leaves accumulates.
  Var param(Parameter<T>& p) {
    const int id = next_id();
    Var v = emplace(
        p.value,
        [id, &p](Tape& t) { t.node(id).value = p.value; },
        [id, &p](Tape& t) {
          auto& g = t.node(id).grad;
          for (size_t i = 0; i < g.data.size(); ++i) p.grad.data[i] += g.data[i];
        });
    return v;
  }

  // Escape hatch for fused ops (losses) defined outside this header.
  Var emplace(Tensor<T> value, std::function<void(Tape&)> fwd, std::function<void(Tape&)> bwd) {
    debug_check_finite(value);
    nodes_.push_back(Node{std::move(value), Tensor<T>(), std::move(fwd), std::move(bwd)});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor<T>& value(Var v) const { return nodes_[check(v)].value; }
  Tensor<T>& value(Var v) { return nodes_[check(v)].value; }
  const Tensor<T>& grad(Var v) const { return nodes_[check(v)].grad; }

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int next_id() const { return static_cast<int>(nodes_.size()); }

  // Exact reverse-mode sweep from a scalar loss. Node gradients are reset
  // here; parameter gradients accumulate across calls (callers zero them
  // between optimizer steps).
  void backward(Var loss) {
    auto& root = nodes_[check(loss)];
    if (root.value.numel() != 1) {
      fail("non_scalar_loss", "backward needs a scalar loss, got shape " + shape_str(root.value.shape));
    }
    for (auto& n : nodes_) {
      if (n.grad.numel() != n.value.numel()) {
        n.grad = Tensor<T>(n.value.shape);
      } else {
        n.grad.zero();
      }
    }
    root.grad.data[0] = T(1);
    for (size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].backward) nodes_[i].backward(*this);
    }
  }

  // Re-runs every recorded forward closure in creation order without
  // re-recording. Cached randomness (dropout masks) is reused, so outputs
  // are identical unless parameter values changed.
  void replay() {
    for (auto& n : nodes_) {
      if (n.forward) n.forward(*this);
    }
  }

 private:
  size_t check(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
      fail("bad_var", "variable does not belong to this tape");
    }
    return static_cast<size_t>(v.id);
  }

  std::vector<Node> nodes_;
};

namespace detail {

// c[m][n] += a[m][k] * b[k][n]; ikj order keeps the b and c rows contiguous.
template <typename T>
inline void matmul_accum(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<int64_t>(i) * k;
    T* crow = c + static_cast<int64_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      const T* brow = b + static_cast<int64_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

// ga[m][k] += g[m][n] * b^T, i.e. ga[i][kk] += dot(g[i], b[kk])
template <typename T>
inline void matmul_accum_bt(const T* g, const T* b, T* ga, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* grow = g + static_cast<int64_t>(i) * n;
    T* garow = ga + static_cast<int64_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const T* brow = b + static_cast<int64_t>(kk) * n;
      T acc = T(0);
      for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
      garow[kk] += acc;
    }
  }
}

// gb[k][n] += a^T * g, i.e. gb[kk][j] += sum_i a[i][kk] * g[i][j]
template <typename T>
inline void matmul_accum_at(const T* a, const T* g, T* gb, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<int64_t>(i) * k;
    const T* grow = g + static_cast<int64_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      T* gbrow = gb + static_cast<int64_t>(kk) * n;
      for (int j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
    }
  }
}

enum class BroadcastKind { kSame, kSuffix, kScalar };

// add/mul broadcast rule: shapes equal, rhs a trailing suffix of lhs, or rhs
// scalar. Anything else is a shape error.
inline BroadcastKind broadcast_kind(const Shape& a, const Shape& b) {
  if (a == b) return BroadcastKind::kSame;
  if (shape_numel(b) == 1) return BroadcastKind::kScalar;
  if (b.size() < a.size() && std::equal(b.begin(), b.end(), a.end() - static_cast<int64_t>(b.size()))) {
    return BroadcastKind::kSuffix;
  }
  fail("shape_mismatch", "cannot broadcast " + shape_str(b) + " against " + shape_str(a));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// forward ops

template <typename T, typename Combine, typename BackA, typename BackB>
Var binary_broadcast_op(Tape<T>& tape, Var a, Var b, Combine combine, BackA back_a, BackB back_b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  const auto kind = detail::broadcast_kind(av.shape, bv.shape);
  const int64_t bn = bv.numel();

  auto apply = [a, b, bn, combine](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    const auto& y = t.value(b);
    for (int64_t i = 0; i < x.numel(); ++i) {
      out.data[static_cast<size_t>(i)] = combine(x.data[static_cast<size_t>(i)],
                                                 y.data[static_cast<size_t>(i % bn)]);
    }
  };
  (void)kind;

  Tensor<T> out(av.shape);
  Tensor<T> tmp = out;
  apply(tape, tmp);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(tmp),
      [id, apply](Tape<T>& t) { apply(t, t.node(id).value); },
      [id, a, b, bn, back_a, back_b](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        const auto& x = t.node(a.id).value;
        const auto& y = t.node(b.id).value;
        auto& ga = t.node(a.id).grad;
        auto& gb = t.node(b.id).grad;
        for (int64_t i = 0; i < g.numel(); ++i) {
          const auto gi = g.data[static_cast<size_t>(i)];
          const auto xi = x.data[static_cast<size_t>(i)];
          const auto yi = y.data[static_cast<size_t>(i % bn)];
          ga.data[static_cast<size_t>(i)] += back_a(gi, xi, yi);
          gb.data[static_cast<size_t>(i % bn)] += back_b(gi, xi, yi);
        }
      });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  return binary_broadcast_op(
      tape, a, b, [](T x, T y) { return x + y; },
      [](T g, T, T) { return g; }, [](T g, T, T) { return g; });
}

template <typename T>
Var mul(Tape<T>& tape, Var a, Var b) {
  return binary_broadcast_op(
      tape, a, b, [](T x, T y) { return x * y; },
      [](T g, T, T y) { return g * y; }, [](T g, T x, T) { return g * x; });
}

template <typename T>
Var matmul(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[1] != bv.shape[0]) {
    fail("shape_mismatch",
         "matmul needs [m,k] x [k,n], got " + shape_str(av.shape) + " x " + shape_str(bv.shape));
  }
  const int m = av.shape[0], k = av.shape[1], n = bv.shape[1];

  auto run = [a, b, m, k, n](Tape<T>& t, Tensor<T>& out) {
    out.zero();
    detail::matmul_accum(t.value(a).data.data(), t.value(b).data.data(), out.data.data(), m, k, n);
  };
  Tensor<T> out(Shape{m, n});
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, b, m, k, n](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        detail::matmul_accum_bt(g.data.data(), t.node(b.id).value.data.data(),
                                t.node(a.id).grad.data.data(), m, k, n);
        detail::matmul_accum_at(t.node(a.id).value.data.data(), g.data.data(),
                                t.node(b.id).grad.data.data(), m, k, n);
      });
}

template <typename T, typename Fwd, typename Bwd>
Var elementwise_op(Tape<T>& tape, Var a, Fwd fwd, Bwd bwd_from_xy) {
  const auto& av = tape.value(a);
  auto run = [a, fwd](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    for (int64_t i = 0; i < x.numel(); ++i) {
      out.data[static_cast<size_t>(i)] = fwd(x.data[static_cast<size_t>(i)]);
    }
  };
  Tensor<T> out(av.shape);
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, bwd_from_xy](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        const auto& x = t.node(a.id).value;
        const auto& y = t.node(id).value;
        auto& ga = t.node(a.id).grad;
        for (int64_t i = 0; i < g.numel(); ++i) {
          ga.data[static_cast<size_t>(i)] +=
              g.data[static_cast<size_t>(i)] *
              bwd_from_xy(x.data[static_cast<size_t>(i)], y.data[static_cast<size_t>(i)]);
        }
      });
}

template <typename T>
Var sigmoid(Tape<T>& tape, Var a) {
  return elementwise_op(
      tape, a,
      [](T x) {
        // stable both directions
        if (x >= T(0)) {
          const T e = std::exp(-x);
          return T(1) / (T(1) + e);
        }
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var tanh(Tape<T>& tape, Var a) {
  return elementwise_op(tape, a, [](T x) { return std::tanh(x); },
                        [](T, T y) { return T(1) - y * y; });
}

// subgradient at 0 is 0
template <typename T>
Var relu(Tape<T>& tape, Var a) {
  return elementwise_op(tape, a, [](T x) { return x > T(0) ? x : T(0); },
                        [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var softmax(Tape<T>& tape, Var a) {
  const auto& av = tape.value(a);
  const int width = av.last_dim();
  if (width < 1) fail("shape_mismatch", "softmax needs a non-empty last dim");
  const int64_t rows = av.numel() / width;

  auto run = [a, width, rows](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    for (int64_t r = 0; r < rows; ++r) {
      const T* row = x.data.data() + r * width;
      T* orow = out.data.data() + r * width;
      T hi = row[0];
      for (int j = 1; j < width; ++j) hi = std::max(hi, row[j]);
      T sum = T(0);
      for (int j = 0; j < width; ++j) {
        orow[j] = std::exp(row[j] - hi);
        sum += orow[j];
      }
      for (int j = 0; j < width; ++j) orow[j] /= sum;
    }
  };
  Tensor<T> out(av.shape);
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, width, rows](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        const auto& y = t.node(id).value;
        auto& ga = t.node(a.id).grad;
        for (int64_t r = 0; r < rows; ++r) {
          const T* grow = g.data.data() + r * width;
          const T* yrow = y.data.data() + r * width;
          T* garow = ga.data.data() + r * width;
          T dot = T(0);
          for (int j = 0; j < width; ++j) dot += grow[j] * yrow[j];
          for (int j = 0; j < width; ++j) garow[j] += (grow[j] - dot) * yrow[j];
        }
      });
}

// Concatenation along the last axis; inputs must agree on every other dim.
template <typename T>
Var concat(Tape<T>& tape, const std::vector<Var>& inputs) {
  if (inputs.empty()) fail("shape_mismatch", "concat needs at least one input");
  Shape lead = tape.value(inputs[0]).shape;
  lead.pop_back();
  int total = 0;
  std::vector<int> widths;
  for (Var v : inputs) {
    const auto& shape = tape.value(v).shape;
    Shape head = shape;
    head.pop_back();
    if (head != lead) {
      fail("shape_mismatch", "concat inputs disagree on leading dims: " +
                                 shape_str(tape.value(inputs[0]).shape) + " vs " + shape_str(shape));
    }
    widths.push_back(shape.back());
    total += shape.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  const int64_t rows = shape_numel(lead);

  auto run = [inputs, widths, total, rows](Tape<T>& t, Tensor<T>& out) {
    int offset = 0;
    for (size_t i = 0; i < inputs.size(); ++i) {
      const auto& x = t.value(inputs[i]);
      const int w = widths[i];
      for (int64_t r = 0; r < rows; ++r) {
        std::copy_n(x.data.data() + r * w, w, out.data.data() + r * total + offset);
      }
      offset += w;
    }
  };
  Tensor<T> out(out_shape);
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, inputs, widths, total, rows](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        int offset = 0;
        for (size_t i = 0; i < inputs.size(); ++i) {
          auto& ga = t.node(inputs[i].id).grad;
          const int w = widths[i];
          for (int64_t r = 0; r < rows; ++r) {
            const T* src = g.data.data() + r * total + offset;
            T* dst = ga.data.data() + r * w;
            for (int j = 0; j < w; ++j) dst[j] += src[j];
          }
          offset += w;
        }
      });
}

// Half-open slice [start, start+len) along the last axis.
template <typename T>
Var slice(Tape<T>& tape, Var a, int start, int len) {
  const auto& av = tape.value(a);
  const int width = av.last_dim();
  if (start < 0 || len < 1 || start + len > width) {
    fail("shape_mismatch", "slice [" + std::to_string(start) + ", " + std::to_string(start + len) +
                               ") out of range for last dim " + std::to_string(width));
  }
  Shape out_shape = av.shape;
  out_shape.back() = len;
  const int64_t rows = av.numel() / width;

  auto run = [a, start, len, width, rows](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    for (int64_t r = 0; r < rows; ++r) {
      std::copy_n(x.data.data() + r * width + start, len, out.data.data() + r * len);
    }
  };
  Tensor<T> out(out_shape);
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, start, len, width, rows](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        auto& ga = t.node(a.id).grad;
        for (int64_t r = 0; r < rows; ++r) {
          const T* src = g.data.data() + r * len;
          T* dst = ga.data.data() + r * width + start;
          for (int j = 0; j < len; ++j) dst[j] += src[j];
        }
      });
}

template <typename T>
Var sum(Tape<T>& tape, Var a) {
  const int64_t n = tape.value(a).numel();
  auto run = [a](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    T acc = T(0);
    for (T v : x.data) acc += v;
    out.data[0] = acc;
  };
  Tensor<T> out(Shape{1});
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, n](Tape<T>& t) {
        const T g = t.node(id).grad.data[0];
        auto& ga = t.node(a.id).grad;
        for (int64_t i = 0; i < n; ++i) ga.data[static_cast<size_t>(i)] += g;
      });
}

template <typename T>
Var mean(Tape<T>& tape, Var a) {
  const int64_t n = tape.value(a).numel();
  auto run = [a, n](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    T acc = T(0);
    for (T v : x.data) acc += v;
    out.data[0] = acc / static_cast<T>(n);
  };
  Tensor<T> out(Shape{1});
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, n](Tape<T>& t) {
        const T g = t.node(id).grad.data[0] / static_cast<T>(n);
        auto& ga = t.node(a.id).grad;
        for (int64_t i = 0; i < n; ++i) ga.data[static_cast<size_t>(i)] += g;
      });
}

// Inverted dropout: in train mode each element is zeroed with probability p
// and survivors scale by 1/(1-p); eval mode is the identity. The mask is
// drawn once at record time and cached, so replay() reuses it.
template <typename T>
Var dropout(Tape<T>& tape, Var a, double p, bool train_mode, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) fail("bad_dropout", "dropout p must be in [0, 1)");
  if (!train_mode || p == 0.0) return a;

  const auto& av = tape.value(a);
  std::vector<T> mask(static_cast<size_t>(av.numel()));
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& m : mask) m = uni(rng) < p ? T(0) : scale;

  auto run = [a, mask](Tape<T>& t, Tensor<T>& out) {
    const auto& x = t.value(a);
    for (size_t i = 0; i < mask.size(); ++i) out.data[i] = x.data[i] * mask[i];
  };
  Tensor<T> out(av.shape);
  run(tape, out);
  const int id = tape.next_id();
  return tape.emplace(
      std::move(out),
      [id, run](Tape<T>& t) { run(t, t.node(id).value); },
      [id, a, mask](Tape<T>& t) {
        const auto& g = t.node(id).grad;
        auto& ga = t.node(a.id).grad;
        for (size_t i = 0; i < mask.size(); ++i) ga.data[i] += g.data[i] * mask[i];
      });
}

// ---------------------------------------------------------------------------
// gradient checking

// Max over parameter elements of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-8), with numeric = central differences of the rebuilt loss.
// The builder must be deterministic so every rebuild sees the same graph.
template <typename T>
double grad_check(const std::function<Var(Tape<T>&)>& build,
                  const std::vector<Parameter<T>*>& params, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  Tape<T> tape;
  Var loss = build(tape);
  tape.backward(loss);

  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad.data);

  auto eval_loss = [&]() {
    Tape<T> t;
    Var l = build(t);
    return static_cast<double>(t.value(l).data[0]);
  };

  double max_rel = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = params[pi]->value.data;
    for (size_t i = 0; i < value.size(); ++i) {
      const T saved = value[i];
      value[i] = saved + static_cast<T>(h);
      const double up = eval_loss();
      value[i] = saved - static_cast<T>(h);
      const double down = eval_loss();
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = static_cast<double>(analytic[pi][i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(exact - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace eegaffect::ad
