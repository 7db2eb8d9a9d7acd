#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace ladr {

// Dense NCHW tensor. Construction zero-fills.
template <typename T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

  std::size_t size() const { return data.size(); }

  T& at(int in, int ic, int iy, int ix) {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  const T& at(int in, int ic, int iy, int ix) const {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

// C(m x n) += A(m x k) * B(k x n), all row-major.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const T av = arow[l];
      if (av == T(0)) continue;
      const T* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(m x n) += A(m x k) * B(n x k)^T.
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * k;
      T acc = T(0);
      for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] += acc;
    }
  }
}

// C(m x n) += A(k x m)^T * B(k x n).
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int l = 0; l < k; ++l) {
    const T* arow = a + static_cast<std::size_t>(l) * m;
    const T* brow = b + static_cast<std::size_t>(l) * n;
    for (int i = 0; i < m; ++i) {
      const T av = arow[i];
      if (av == T(0)) continue;
      T* crow = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace ladr
