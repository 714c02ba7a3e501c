#pragma once

#include "subriem/lie_algebra.hpp"
#include "subriem/scalar.hpp"
#include "subriem/tensor.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

class PreconditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Left-invariant sub-Riemannian structure on a Lie group together with a
/// taming metric. Indices are 0-based positions in the algebra basis.
template <class S>
struct SubRiemannianStructure {
  LieAlgebra<S> algebra;
  std::vector<std::size_t> horizontal;
  Matrix<S> gram_h;     // on the horizontal indices, in the order given
  Matrix<S> gram_full;  // on all basis vectors
  std::optional<Stratification> strat;

  std::size_t dim() const { return algebra.dim(); }
  std::size_t rank() const { return horizontal.size(); }

  static SubRiemannianStructure orthonormal(LieAlgebra<S> alg, std::vector<std::size_t> horizontal,
                                            std::optional<Stratification> strat = std::nullopt) {
    SubRiemannianStructure s;
    std::size_t n = alg.dim();
    s.algebra = std::move(alg);
    s.horizontal = std::move(horizontal);
    s.gram_h = Matrix<S>::identity(s.horizontal.size());
    s.gram_full = Matrix<S>::identity(n);
    s.strat = std::move(strat);
    return s;
  }

  /// The first layer of a stratification as horizontal bundle, orthonormal metric.
  static SubRiemannianStructure carnot(LieAlgebra<S> alg, Stratification strat) {
    auto h = strat.layers.at(0);
    return orthonormal(std::move(alg), h, std::move(strat));
  }

  /// Taming check g|H = g_H, reported as the list of mismatching index pairs.
  std::vector<std::pair<std::size_t, std::size_t>> taming_violations() const {
    std::vector<std::pair<std::size_t, std::size_t>> bad;
    for (std::size_t a = 0; a < rank(); ++a)
      for (std::size_t b = 0; b < rank(); ++b)
        if (gram_full(horizontal[a], horizontal[b]) != gram_h(a, b)) bad.push_back({a, b});
    return bad;
  }

  /// Orthonormal working frame F_a = sum_i B(a,i) e_i, horizontal vectors
  /// first, vertical vectors spanning the g-orthogonal complement of H.
  Matrix<S> orthonormal_frame() const {
    std::size_t n = dim();
    if (gram_h.size() != rank() || gram_full.size() != n)
      throw std::invalid_argument("Gram matrix sizes do not match the structure");
    if (!taming_violations().empty()) throw PreconditionViolated("taming metric does not restrict to gram_h");
    std::vector<std::vector<S>> basis;
    auto inner = [&](const std::vector<S>& u, const std::vector<S>& v) {
      S acc(0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += u[i] * gram_full(i, j) * v[j];
      return acc;
    };
    auto add = [&](std::vector<S> u, bool must_be_independent) {
      for (const auto& b : basis) {
        S p = inner(u, b);
        for (std::size_t i = 0; i < n; ++i) u[i] -= p * b[i];
      }
      S nn = inner(u, u);
      if (to_double(nn) <= 1e-14) {
        if (must_be_independent) throw PreconditionViolated("Gram matrix is not positive definite on H");
        return;
      }
      S r = scalar_sqrt(nn);
      for (auto& x : u) x /= r;
      basis.push_back(std::move(u));
    };
    for (auto h : horizontal) {
      if (h >= n) throw std::out_of_range("horizontal index out of range");
      add(algebra.basis_vector(h), true);
    }
    for (std::size_t i = 0; i < n && basis.size() < n; ++i) add(algebra.basis_vector(i), false);
    if (basis.size() != n) throw PreconditionViolated("taming metric is degenerate");
    Matrix<S> b(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t i = 0; i < n; ++i) b(a, i) = basis[a][i];
    return b;
  }
};

template <class S>
Matrix<S> inverse_exact(const Matrix<S>& m) {
  return inverse(m, [](const S& x) { return std::abs(to_double(x)); });
}

/// Horizontal vector representing the covector alpha (components on the
/// algebra basis) through g_H.
template <class S>
std::vector<S> sharp_H(const SubRiemannianStructure<S>& srs, const std::vector<S>& alpha) {
  std::size_t n = srs.dim(), r = srs.rank();
  if (alpha.size() != n) throw std::invalid_argument("sharp_H: covector length differs from dim");
  std::vector<S> a(r);
  for (std::size_t i = 0; i < r; ++i) a[i] = alpha[srs.horizontal[i]];
  auto ginv = inverse_exact(srs.gram_h);
  // Restricting alpha to H in the coordinates of the horizontal basis vectors
  // assumes H is spanned by those basis vectors, which holds by construction.
  auto coeff = ginv.apply(a);
  std::vector<S> v(n, S(0));
  for (std::size_t i = 0; i < r; ++i) v[srs.horizontal[i]] = coeff[i];
  return v;
}

template <class S>
S cometric(const SubRiemannianStructure<S>& srs, const std::vector<S>& alpha, const std::vector<S>& beta) {
  auto v = sharp_H(srs, beta);
  S acc(0);
  for (std::size_t i = 0; i < srs.dim(); ++i) acc += alpha[i] * v[i];
  return acc;
}

}  // namespace subriem
