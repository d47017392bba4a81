#pragma once

#include <cstddef>
#include <vector>

namespace mtvrp {

// Dense row-major matrix. Vectors are represented as R x 1 or 1 x C.
template <class T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), T(0)) {}
  Mat(int r, int c, T fill)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  T* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const T* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

  T& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const T& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void zero() { std::fill(a.begin(), a.end(), T(0)); }
};

}  // namespace mtvrp
