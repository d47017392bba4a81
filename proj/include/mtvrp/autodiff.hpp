#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtvrp/kernels.hpp"
#include "mtvrp/mat.hpp"
#include "mtvrp/rng.hpp"

namespace mtvrp::ad {

// Named parameter tensors plus gradient accumulators.
template <class T>
struct ParamStore {
  struct Entry {
    std::string name;
    Mat<T> value;
    Mat<T> grad;
  };
  std::vector<Entry> entries;
  std::unordered_map<std::string, int> index;

  int add(const std::string& name, int rows, int cols) {
    entries.push_back({name, Mat<T>(rows, cols), Mat<T>(rows, cols)});
    index.emplace(name, static_cast<int>(entries.size()) - 1);
    return static_cast<int>(entries.size()) - 1;
  }

  Entry& at(int i) { return entries[i]; }
  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }

  size_t num_scalars() const {
    size_t n = 0;
    for (const auto& e : entries) n += e.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries) e.grad.zero();
  }

  void init_uniform(Rng& rng) {
    for (auto& e : entries) {
      if (e.name.size() > 2 && e.name.compare(e.name.size() - 2, 2, ".g") == 0) {
        std::fill(e.value.a.begin(), e.value.a.end(), T(1));  // norm gains
        continue;
      }
      const double bound = 1.0 / std::sqrt(static_cast<double>(e.value.cols));
      for (auto& w : e.value.a) w = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
};

template <class T>
struct Var {
  int id = -1;
};

// Reverse-mode tape over Mat<T>. Ops compute values through the shared
// kernels; with record=false no backward closures are kept and backward() is
// unavailable, which is the inference mode. Gradients accumulate either into
// the ParamStore or into an external per-call sink vector (one Mat per
// parameter), which keeps batched backward passes deterministic: callers sum
// sinks in a fixed order.
template <class T>
class Tape {
 public:
  explicit Tape(ParamStore<T>* params, bool record, std::vector<Mat<T>>* grad_sinks = nullptr)
      : params_(params), record_(record), sinks_(grad_sinks) {
    if (params_) param_leaf_.assign(params_->entries.size(), -1);
  }

  bool recording() const { return record_; }

  Var<T> param(int idx) {
    if (param_leaf_[idx] >= 0) return {param_leaf_[idx]};
    Node n;
    n.external = &params_->entries[idx].value;
    n.param_idx = idx;
    nodes_.push_back(std::move(n));
    param_leaf_[idx] = static_cast<int>(nodes_.size()) - 1;
    return {param_leaf_[idx]};
  }

  Var<T> param(const std::string& name) { return param(params_->find(name)); }

  Var<T> input(Mat<T> v) {
    Node n;
    n.owned = std::move(v);
    n.constant = true;
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  const Mat<T>& val(Var<T> x) const {
    const Node& n = nodes_[x.id];
    return n.external ? *n.external : n.owned;
  }

  Mat<T>& grad(Var<T> x) { return grad_of(x.id); }

  // ---- ops ----

  // y = x * W^T + b (W: out x in, b: 1 x out)
  Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
    const Mat<T>&xv = val(x), &wv = val(w), &bv = val(b);
    Mat<T> y(xv.rows, wv.rows);
    kernels::matmul_nt(xv, wv, y);
    for (int r = 0; r < y.rows; ++r)
      for (int c = 0; c < y.cols; ++c) y.at(r, c) += bv.at(0, c);
    return make(std::move(y), {x.id, w.id, b.id}, [x, w, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>&xv = t.val(x), &wv = t.val(w);
      if (t.wants_grad(x.id)) {
        Mat<T> dx(xv.rows, xv.cols);
        kernels::matmul_nn(dy, wv, dx);
        t.accumulate(x.id, dx);
      }
      if (t.wants_grad(w.id)) {
        Mat<T> dw(wv.rows, wv.cols);
        kernels::matmul_tn(dy, xv, dw);
        t.accumulate(w.id, dw);
      }
      if (t.wants_grad(b.id)) {
        Mat<T> db(1, dy.cols);
        for (int r = 0; r < dy.rows; ++r)
          for (int c = 0; c < dy.cols; ++c) db.at(0, c) += dy.at(r, c);
        t.accumulate(b.id, db);
      }
    });
  }

  // y = a * b^T
  Var<T> matmul_nt(Var<T> a, Var<T> b) {
    const Mat<T>&av = val(a), &bv = val(b);
    Mat<T> y(av.rows, bv.rows);
    kernels::matmul_nt(av, bv, y);
    return make(std::move(y), {a.id, b.id}, [a, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      if (t.wants_grad(a.id)) {
        Mat<T> da(t.val(a).rows, t.val(a).cols);
        kernels::matmul_nn(dy, t.val(b), da);
        t.accumulate(a.id, da);
      }
      if (t.wants_grad(b.id)) {
        Mat<T> db(t.val(b).rows, t.val(b).cols);
        kernels::matmul_tn(dy, t.val(a), db);
        t.accumulate(b.id, db);
      }
    });
  }

  // y = a * b
  Var<T> matmul_nn(Var<T> a, Var<T> b) {
    const Mat<T>&av = val(a), &bv = val(b);
    Mat<T> y(av.rows, bv.cols);
    kernels::matmul_nn(av, bv, y);
    return make(std::move(y), {a.id, b.id}, [a, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      if (t.wants_grad(a.id)) {
        Mat<T> da(t.val(a).rows, t.val(a).cols);
        kernels::matmul_nt(dy, t.val(b), da);
        t.accumulate(a.id, da);
      }
      if (t.wants_grad(b.id)) {
        Mat<T> db(t.val(b).rows, t.val(b).cols);
        kernels::matmul_tn(t.val(a), dy, db);
        t.accumulate(b.id, db);
      }
    });
  }

  Var<T> add(Var<T> a, Var<T> b) {
    Mat<T> y = val(a);
    const Mat<T>& bv = val(b);
    for (size_t i = 0; i < y.size(); ++i) y.a[i] += bv.a[i];
    return make(std::move(y), {a.id, b.id}, [a, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      if (t.wants_grad(a.id)) t.accumulate(a.id, dy);
      if (t.wants_grad(b.id)) t.accumulate(b.id, dy);
    });
  }

  Var<T> scale(Var<T> a, T c) {
    Mat<T> y = val(a);
    for (auto& v : y.a) v *= c;
    return make(std::move(y), {a.id}, [a, c](Tape& t, int self) {
      if (!t.wants_grad(a.id)) return;
      Mat<T> da = t.grad_of(self);
      for (auto& v : da.a) v *= c;
      t.accumulate(a.id, da);
    });
  }

  // y[r][c] = x[r][c] * s[r] (s: R x 1)
  Var<T> scale_rows(Var<T> x, Var<T> s) {
    const Mat<T>&xv = val(x), &sv = val(s);
    Mat<T> y = xv;
    for (int r = 0; r < y.rows; ++r) {
      const T f = sv.at(r, 0);
      for (int c = 0; c < y.cols; ++c) y.at(r, c) *= f;
    }
    return make(std::move(y), {x.id, s.id}, [x, s](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>&xv = t.val(x), &sv = t.val(s);
      if (t.wants_grad(x.id)) {
        Mat<T> dx = dy;
        for (int r = 0; r < dx.rows; ++r) {
          const T f = sv.at(r, 0);
          for (int c = 0; c < dx.cols; ++c) dx.at(r, c) *= f;
        }
        t.accumulate(x.id, dx);
      }
      if (t.wants_grad(s.id)) {
        Mat<T> ds(sv.rows, 1);
        for (int r = 0; r < dy.rows; ++r) {
          T acc = T(0);
          for (int c = 0; c < dy.cols; ++c) acc += dy.at(r, c) * xv.at(r, c);
          ds.at(r, 0) = acc;
        }
        t.accumulate(s.id, ds);
      }
    });
  }

  // y[r] = sum_c a[r][c] * b[r][c] (R x 1)
  Var<T> rowwise_dot(Var<T> a, Var<T> b) {
    const Mat<T>&av = val(a), &bv = val(b);
    Mat<T> y(av.rows, 1);
    for (int r = 0; r < av.rows; ++r) {
      T acc = T(0);
      for (int c = 0; c < av.cols; ++c) acc += av.at(r, c) * bv.at(r, c);
      y.at(r, 0) = acc;
    }
    return make(std::move(y), {a.id, b.id}, [a, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>&av = t.val(a), &bv = t.val(b);
      auto push = [&](int id, const Mat<T>& other) {
        if (!t.wants_grad(id)) return;
        Mat<T> d(other.rows, other.cols);
        for (int r = 0; r < d.rows; ++r)
          for (int c = 0; c < d.cols; ++c) d.at(r, c) = dy.at(r, 0) * other.at(r, c);
        t.accumulate(id, d);
      };
      push(a.id, bv);
      push(b.id, av);
    });
  }

  Var<T> concat_cols(const std::vector<Var<T>>& xs) {
    int rows = val(xs[0]).rows, cols = 0;
    for (auto x : xs) cols += val(x).cols;
    Mat<T> y(rows, cols);
    int off = 0;
    for (auto x : xs) {
      const Mat<T>& xv = val(x);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < xv.cols; ++c) y.at(r, off + c) = xv.at(r, c);
      off += xv.cols;
    }
    std::vector<int> ids;
    for (auto x : xs) ids.push_back(x.id);
    return make(std::move(y), ids, [xs](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      int off = 0;
      for (auto x : xs) {
        const Mat<T>& xv = t.val(x);
        if (t.wants_grad(x.id)) {
          Mat<T> dx(xv.rows, xv.cols);
          for (int r = 0; r < xv.rows; ++r)
            for (int c = 0; c < xv.cols; ++c) dx.at(r, c) = dy.at(r, off + c);
          t.accumulate(x.id, dx);
        }
        off += xv.cols;
      }
    });
  }

  Var<T> slice_cols(Var<T> x, int c0, int c1) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, c1 - c0);
    for (int r = 0; r < xv.rows; ++r)
      for (int c = c0; c < c1; ++c) y.at(r, c - c0) = xv.at(r, c);
    return make(std::move(y), {x.id}, [x, c0, c1](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& xv = t.val(x);
      Mat<T> dx(xv.rows, xv.cols);
      for (int r = 0; r < xv.rows; ++r)
        for (int c = c0; c < c1; ++c) dx.at(r, c) = dy.at(r, c - c0);
      t.accumulate(x.id, dx);
    });
  }

  Var<T> concat_rows(Var<T> a, Var<T> b) {
    const Mat<T>&av = val(a), &bv = val(b);
    Mat<T> y(av.rows + bv.rows, av.cols);
    for (int r = 0; r < av.rows; ++r)
      for (int c = 0; c < av.cols; ++c) y.at(r, c) = av.at(r, c);
    for (int r = 0; r < bv.rows; ++r)
      for (int c = 0; c < bv.cols; ++c) y.at(av.rows + r, c) = bv.at(r, c);
    return make(std::move(y), {a.id, b.id}, [a, b](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>&av = t.val(a), &bv = t.val(b);
      if (t.wants_grad(a.id)) {
        Mat<T> da(av.rows, av.cols);
        for (int r = 0; r < av.rows; ++r)
          for (int c = 0; c < av.cols; ++c) da.at(r, c) = dy.at(r, c);
        t.accumulate(a.id, da);
      }
      if (t.wants_grad(b.id)) {
        Mat<T> db(bv.rows, bv.cols);
        for (int r = 0; r < bv.rows; ++r)
          for (int c = 0; c < bv.cols; ++c) db.at(r, c) = dy.at(av.rows + r, c);
        t.accumulate(b.id, db);
      }
    });
  }

  Var<T> gather_rows(Var<T> x, std::vector<int> idx) {
    const Mat<T>& xv = val(x);
    Mat<T> y(static_cast<int>(idx.size()), xv.cols);
    for (size_t r = 0; r < idx.size(); ++r)
      for (int c = 0; c < xv.cols; ++c) y.at(static_cast<int>(r), c) = xv.at(idx[r], c);
    return make(std::move(y), {x.id}, [x, idx](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& xv = t.val(x);
      Mat<T> dx(xv.rows, xv.cols);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < xv.cols; ++c) dx.at(idx[r], c) += dy.at(static_cast<int>(r), c);
      t.accumulate(x.id, dx);
    });
  }

  // Softmax over each row restricted to unmasked entries; masked entries get
  // probability zero. mask may be empty (nothing masked).
  Var<T> softmax_rows(Var<T> x, Mat<uint8_t> mask) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, xv.cols);
    kernels::softmax_rows(xv, mask.size() ? &mask : nullptr, y);
    return make(std::move(y), {x.id}, [x](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& y = t.val_of(self);
      Mat<T> dx(y.rows, y.cols);
      for (int r = 0; r < y.rows; ++r) {
        T dot = T(0);
        for (int c = 0; c < y.cols; ++c) dot += dy.at(r, c) * y.at(r, c);
        for (int c = 0; c < y.cols; ++c) dx.at(r, c) = y.at(r, c) * (dy.at(r, c) - dot);
      }
      t.accumulate(x.id, dx);
    });
  }

  // Softmax over the k largest entries of each row; the rest get probability
  // zero. Ties resolve toward the lower column index. The selection is
  // treated as locally constant for gradients.
  Var<T> softmax_topk_rows(Var<T> x, int k) {
    const Mat<T>& xv = val(x);
    if (k >= xv.cols) return softmax_rows(x, Mat<uint8_t>());
    Mat<uint8_t> mask(xv.rows, xv.cols);
    std::vector<int> ord(xv.cols);
    for (int r = 0; r < xv.rows; ++r) {
      for (int c = 0; c < xv.cols; ++c) ord[c] = c;
      std::stable_sort(ord.begin(), ord.end(), [&](int i, int j) {
        const T a = xv.at(r, i), b = xv.at(r, j);
        if (a != b) return a > b;
        return i < j;
      });
      for (int i = 0; i < k; ++i) mask.at(r, ord[i]) = 1;
    }
    return softmax_rows(x, std::move(mask));
  }

  // Row-wise log-softmax over unmasked entries; masked entries become -inf.
  Var<T> log_softmax_rows(Var<T> x, Mat<uint8_t> mask) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, xv.cols);
    for (int r = 0; r < xv.rows; ++r)
      kernels::detail::log_softmax_row(xv.row(r), mask.size() ? mask.row(r) : nullptr, xv.cols,
                                       y.row(r));
    return make(std::move(y), {x.id}, [x, mask](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& y = t.val_of(self);
      Mat<T> dx(y.rows, y.cols);
      for (int r = 0; r < y.rows; ++r) {
        T dsum = T(0);
        for (int c = 0; c < y.cols; ++c)
          if (!mask.size() || mask.at(r, c)) dsum += dy.at(r, c);
        for (int c = 0; c < y.cols; ++c) {
          if (mask.size() && !mask.at(r, c)) continue;
          dx.at(r, c) = dy.at(r, c) - std::exp(y.at(r, c)) * dsum;
        }
      }
      t.accumulate(x.id, dx);
    });
  }

  // RMS norm per row with learned gain g (1 x C).
  Var<T> rmsnorm(Var<T> x, Var<T> g) {
    const Mat<T>&xv = val(x), &gv = val(g);
    Mat<T> y(xv.rows, xv.cols);
    kernels::rmsnorm_rows(xv, gv, kNormEps, y);
    return make(std::move(y), {x.id, g.id}, [x, g](Tape& t, int self) {
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>&xv = t.val(x), &gv = t.val(g);
      const int n = xv.cols;
      Mat<T> dx(xv.rows, n);
      Mat<T> dg(1, n);
      for (int r = 0; r < xv.rows; ++r) {
        T ms = T(0);
        for (int c = 0; c < n; ++c) ms += xv.at(r, c) * xv.at(r, c);
        const T inv = T(1) / std::sqrt(ms / static_cast<T>(n) + kNormEps);
        T dot = T(0);
        for (int c = 0; c < n; ++c) dot += dy.at(r, c) * gv.at(0, c) * xv.at(r, c);
        const T f = inv * inv * inv / static_cast<T>(n);
        for (int c = 0; c < n; ++c) {
          dx.at(r, c) = inv * gv.at(0, c) * dy.at(r, c) - f * xv.at(r, c) * dot;
          dg.at(0, c) += dy.at(r, c) * xv.at(r, c) * inv;
        }
      }
      if (t.wants_grad(x.id)) t.accumulate(x.id, dx);
      if (t.wants_grad(g.id)) t.accumulate(g.id, dg);
    });
  }

  Var<T> gelu(Var<T> x) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, xv.cols);
    for (size_t i = 0; i < xv.size(); ++i) y.a[i] = gelu_fwd(xv.a[i]);
    return make(std::move(y), {x.id}, [x](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& xv = t.val(x);
      Mat<T> dx(xv.rows, xv.cols);
      for (size_t i = 0; i < xv.size(); ++i) dx.a[i] = dy.a[i] * gelu_grad(xv.a[i]);
      t.accumulate(x.id, dx);
    });
  }

  Var<T> tanh_op(Var<T> x) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, xv.cols);
    for (size_t i = 0; i < xv.size(); ++i) y.a[i] = std::tanh(xv.a[i]);
    return make(std::move(y), {x.id}, [x](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& y = t.val_of(self);
      Mat<T> dx(y.rows, y.cols);
      for (size_t i = 0; i < y.size(); ++i) dx.a[i] = dy.a[i] * (T(1) - y.a[i] * y.a[i]);
      t.accumulate(x.id, dx);
    });
  }

  // y[r] = x[r][cols[r]] (R x 1)
  Var<T> gather_cols_per_row(Var<T> x, std::vector<int> cols) {
    const Mat<T>& xv = val(x);
    Mat<T> y(xv.rows, 1);
    for (int r = 0; r < xv.rows; ++r) y.at(r, 0) = xv.at(r, cols[r]);
    return make(std::move(y), {x.id}, [x, cols](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const Mat<T>& dy = t.grad_of(self);
      const Mat<T>& xv = t.val(x);
      Mat<T> dx(xv.rows, xv.cols);
      for (int r = 0; r < xv.rows; ++r) dx.at(r, cols[r]) += dy.at(r, 0);
      t.accumulate(x.id, dx);
    });
  }

  // scalar = sum_r w[r] * x[r] for column x.
  Var<T> weighted_sum(Var<T> x, std::vector<T> w) {
    const Mat<T>& xv = val(x);
    Mat<T> y(1, 1);
    T acc = T(0);
    for (int r = 0; r < xv.rows; ++r) acc += w[r] * xv.at(r, 0);
    y.at(0, 0) = acc;
    return make(std::move(y), {x.id}, [x, w](Tape& t, int self) {
      if (!t.wants_grad(x.id)) return;
      const T dy = t.grad_of(self).at(0, 0);
      const Mat<T>& xv = t.val(x);
      Mat<T> dx(xv.rows, 1);
      for (int r = 0; r < xv.rows; ++r) dx.at(r, 0) = w[r] * dy;
      t.accumulate(x.id, dx);
    });
  }

  // Runs the reverse sweep from a scalar loss and flushes parameter
  // gradients into the store (or the external sinks).
  void backward(Var<T> loss) {
    if (!record_) throw std::logic_error("backward on a non-recording tape");
    grad_of(loss.id).at(0, 0) = T(1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.has_grad || !n.back) continue;
      n.back(*this, i);
    }
    for (size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (n.param_idx < 0 || !n.has_grad) continue;
      Mat<T>& sink = sinks_ ? (*sinks_)[n.param_idx] : params_->entries[n.param_idx].grad;
      if (sink.size() == 0) sink = Mat<T>(n.grad.rows, n.grad.cols);
      for (size_t k = 0; k < n.grad.size(); ++k) sink.a[k] += n.grad.a[k];
    }
  }

  static constexpr T kNormEps = T(1e-8);

 private:
  struct Node {
    Mat<T> owned;
    const Mat<T>* external = nullptr;
    Mat<T> grad;
    bool has_grad = false;
    bool constant = false;
    int param_idx = -1;
    std::function<void(Tape&, int)> back;
  };

  const Mat<T>& val_of(int id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.owned;
  }

  bool wants_grad(int id) const { return !nodes_[id].constant; }

  Mat<T>& grad_of(int id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      const Mat<T>& v = val_of(id);
      n.grad = Mat<T>(v.rows, v.cols);
      n.has_grad = true;
    }
    return n.grad;
  }

  void accumulate(int id, const Mat<T>& g) {
    Mat<T>& dst = grad_of(id);
    for (size_t i = 0; i < dst.size(); ++i) dst.a[i] += g.a[i];
  }

  template <class F>
  Var<T> make(Mat<T> y, const std::vector<int>& parents, F&& back) {
    Node n;
    n.owned = std::move(y);
    if (record_) {
      bool any = false;
      for (int p : parents) any = any || wants_grad(p);
      if (any)
        n.back = std::forward<F>(back);
      else
        n.constant = true;
    } else {
      n.constant = true;
    }
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  static T gelu_fwd(T x) {
    const T c = T(0.7978845608028654);  // sqrt(2/pi)
    const T u = c * (x + T(0.044715) * x * x * x);
    return T(0.5) * x * (T(1) + std::tanh(u));
  }

  static T gelu_grad(T x) {
    const T c = T(0.7978845608028654);
    const T u = c * (x + T(0.044715) * x * x * x);
    const T th = std::tanh(u);
    const T sech2 = T(1) - th * th;
    return T(0.5) * (T(1) + th) + T(0.5) * x * sech2 * c * (T(1) + T(0.134145) * x * x);
  }

  ParamStore<T>* params_;
  bool record_;
  std::vector<Mat<T>>* sinks_;
  std::vector<Node> nodes_;
  std::vector<int> param_leaf_;
};

}  // namespace mtvrp::ad
