#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "mtvrp/mat.hpp"

// Row-level compute kernels. The OpenMP entry points and the serial reference
// implementations call the same per-row helpers, so for a given build the two
// paths produce bitwise-identical results; tests assert exactly that. The
// helpers are kept out of line so both callers execute the same code.

namespace mtvrp::kernels {

namespace detail {

template <class T>
__attribute__((noinline)) void matmul_nt_row(const T* arow, const Mat<T>& b, T* crow) {
  const int k = b.cols;
  for (int j = 0; j < b.rows; ++j) {
    const T* brow = b.row(j);
    T acc = T(0);
    for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
    crow[j] = acc;
  }
}

template <class T>
__attribute__((noinline)) void matmul_nn_row(const T* arow, const Mat<T>& b, T* crow) {
  const int n = b.cols;
  for (int j = 0; j < n; ++j) crow[j] = T(0);
  for (int p = 0; p < b.rows; ++p) {
    const T av = arow[p];
    const T* brow = b.row(p);
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

// crow[j] over column j of a (length m) times b column block handled by caller.
template <class T>
__attribute__((noinline)) void matmul_tn_row(const Mat<T>& a, const Mat<T>& b, int i, T* crow) {
  const int n = b.cols;
  for (int j = 0; j < n; ++j) crow[j] = T(0);
  for (int p = 0; p < a.rows; ++p) {
    const T av = a.at(p, i);
    const T* brow = b.row(p);
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

template <class T>
__attribute__((noinline)) void softmax_row(const T* x, const uint8_t* mask, int n, T* y) {
  T hi = -std::numeric_limits<T>::infinity();
  for (int j = 0; j < n; ++j)
    if (!mask || mask[j]) hi = std::max(hi, x[j]);
  if (hi == -std::numeric_limits<T>::infinity()) {
    for (int j = 0; j < n; ++j) y[j] = T(0);
    return;
  }
  T z = T(0);
  for (int j = 0; j < n; ++j) {
    if (!mask || mask[j]) {
      y[j] = std::exp(x[j] - hi);
      z += y[j];
    } else {
      y[j] = T(0);
    }
  }
  const T inv = T(1) / z;
  for (int j = 0; j < n; ++j) y[j] *= inv;
}

template <class T>
__attribute__((noinline)) void log_softmax_row(const T* x, const uint8_t* mask, int n, T* y) {
  T hi = -std::numeric_limits<T>::infinity();
  for (int j = 0; j < n; ++j)
    if (!mask || mask[j]) hi = std::max(hi, x[j]);
  T z = T(0);
  for (int j = 0; j < n; ++j)
    if (!mask || mask[j]) z += std::exp(x[j] - hi);
  const T lz = std::log(z) + hi;
  for (int j = 0; j < n; ++j) {
    if (!mask || mask[j])
      y[j] = x[j] - lz;
    else
      y[j] = -std::numeric_limits<T>::infinity();
  }
}

template <class T>
__attribute__((noinline)) void rmsnorm_row(const T* x, const T* g, int n, T eps, T* y) {
  T ms = T(0);
  for (int j = 0; j < n; ++j) ms += x[j] * x[j];
  const T inv = T(1) / std::sqrt(ms / static_cast<T>(n) + eps);
  for (int j = 0; j < n; ++j) y[j] = x[j] * inv * g[j];
}

}  // namespace detail

inline constexpr long kParallelGrain = 1 << 16;

namespace serial {

// c = a * b^T, a: m x k, b: n x k.
template <class T>
void matmul_nt(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  for (int i = 0; i < a.rows; ++i) detail::matmul_nt_row(a.row(i), b, c.row(i));
}

// c = a * b, a: m x k, b: k x n.
template <class T>
void matmul_nn(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  for (int i = 0; i < a.rows; ++i) detail::matmul_nn_row(a.row(i), b, c.row(i));
}

// c = a^T * b, a: m x k, b: m x n, c: k x n.
template <class T>
void matmul_tn(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  for (int i = 0; i < a.cols; ++i) detail::matmul_tn_row(a, b, i, c.row(i));
}

template <class T>
void softmax_rows(const Mat<T>& x, const Mat<uint8_t>* mask, Mat<T>& y) {
  for (int i = 0; i < x.rows; ++i)
    detail::softmax_row(x.row(i), mask ? mask->row(i) : nullptr, x.cols, y.row(i));
}

template <class T>
void rmsnorm_rows(const Mat<T>& x, const Mat<T>& g, T eps, Mat<T>& y) {
  for (int i = 0; i < x.rows; ++i) detail::rmsnorm_row(x.row(i), g.row(0), x.cols, eps, y.row(i));
}

}  // namespace serial

template <class T>
void matmul_nt(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  const long work = static_cast<long>(a.rows) * b.rows * b.cols;
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (int i = 0; i < a.rows; ++i) detail::matmul_nt_row(a.row(i), b, c.row(i));
}

template <class T>
void matmul_nn(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  const long work = static_cast<long>(a.rows) * b.rows * b.cols;
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (int i = 0; i < a.rows; ++i) detail::matmul_nn_row(a.row(i), b, c.row(i));
}

template <class T>
void matmul_tn(const Mat<T>& a, const Mat<T>& b, Mat<T>& c) {
  const long work = static_cast<long>(a.rows) * a.cols * b.cols;
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (int i = 0; i < a.cols; ++i) detail::matmul_tn_row(a, b, i, c.row(i));
}

template <class T>
void softmax_rows(const Mat<T>& x, const Mat<uint8_t>* mask, Mat<T>& y) {
  const long work = static_cast<long>(x.rows) * x.cols * 8;
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (int i = 0; i < x.rows; ++i)
    detail::softmax_row(x.row(i), mask ? mask->row(i) : nullptr, x.cols, y.row(i));
}

template <class T>
void rmsnorm_rows(const Mat<T>& x, const Mat<T>& g, T eps, Mat<T>& y) {
  const long work = static_cast<long>(x.rows) * x.cols * 4;
#pragma omp parallel for schedule(static) if (work > kParallelGrain)
  for (int i = 0; i < x.rows; ++i) detail::rmsnorm_row(x.row(i), g.row(0), x.cols, eps, y.row(i));
}

}  // namespace mtvrp::kernels
