#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace subriem {

/// Dense square matrix with row-major storage. Works for exact scalars,
/// where Eigen's numeric traits are not available.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, T fill = T(0)) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("matrix size mismatch");
    Matrix c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        if (a(i, k) == T(0)) continue;
        for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.n_ == b.n_ && a.data_ == b.data_;
  }

  std::vector<T> apply(const std::vector<T>& v) const {
    std::vector<T> out(n_, T(0));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

/// Gauss-Jordan inverse with partial pivoting on |to_double(.)|.
template <class T, class Abs>
Matrix<T> inverse(const Matrix<T>& m, Abs magnitude) {
  std::size_t n = m.size();
  Matrix<T> a = m, inv = Matrix<T>::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (magnitude(a(r, c)) > magnitude(a(piv, c))) piv = r;
    if (magnitude(a(piv, c)) == 0) throw std::domain_error("singular matrix");
    if (piv != c)
      for (std::size_t q = 0; q < n; ++q) {
        std::swap(a(c, q), a(piv, q));
        std::swap(inv(c, q), inv(piv, q));
      }
    T d = a(c, c);
    for (std::size_t q = 0; q < n; ++q) {
      a(c, q) /= d;
      inv(c, q) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a(r, c) == T(0)) continue;
      T f = a(r, c);
      for (std::size_t q = 0; q < n; ++q) {
        a(r, q) -= f * a(c, q);
        inv(r, q) -= f * inv(c, q);
      }
    }
  }
  return inv;
}

/// Dense n x n x n array, indexed t(i, j, k).
template <class T>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t n, T fill = T(0)) : n_(n), data_(n * n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n_ + j) * n_ + k]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * n_ + j) * n_ + k];
  }
  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.n_ == b.n_ && a.data_ == b.data_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

/// Dense n^4 array, indexed t(i, j, k, l).
template <class T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t n, T fill = T(0)) : n_(n), data_(n * n * n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * n_ + j) * n_ + k) * n_ + l];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[((i * n_ + j) * n_ + k) * n_ + l];
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

}  // namespace subriem
