#pragma once

#include "subriem/scalar.hpp"
#include "subriem/tensor.hpp"

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

class UnsupportedStep : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BracketEntry {
  std::size_t i, j, k;  // 0-indexed
  double value;
};

/// Structure constants [e_i, e_j] = sum_k c(i,j,k) e_k, stored densely with
/// an index of the nonzero entries for fast contraction.
template <class S>
class LieAlgebra {
 public:
  struct Term {
    std::size_t i, j, k;
    S value;
  };

  LieAlgebra() = default;
  explicit LieAlgebra(std::size_t dim, std::vector<std::string> names = {})
      : dim_(dim), names_(std::move(names)), c_(dim) {
    if (dim == 0) throw std::invalid_argument("algebra dimension must be positive");
    if (names_.empty())
      for (std::size_t i = 0; i < dim; ++i) names_.push_back("e" + std::to_string(i + 1));
    if (names_.size() != dim) throw std::invalid_argument("basis name count differs from dim");
  }

  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& names() const { return names_; }
  const S& c(std::size_t i, std::size_t j, std::size_t k) const { return c_(i, j, k); }
  const Tensor3<S>& constants() const { return c_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Sets c(i,j,k) without touching c(j,i,k).
  void set_raw(std::size_t i, std::size_t j, std::size_t k, const S& v) {
    check_index(i), check_index(j), check_index(k);
    c_(i, j, k) = v;
    rebuild();
  }
  /// Sets [e_i, e_j] component k and its antisymmetric partner.
  void set_bracket(std::size_t i, std::size_t j, std::size_t k, const S& v) {
    check_index(i), check_index(j), check_index(k);
    c_(i, j, k) = v;
    c_(j, i, k) = -v;
    rebuild();
  }

  template <class V>
  std::vector<V> bracket(const std::vector<V>& v, const std::vector<V>& w) const {
    if (v.size() != dim_ || w.size() != dim_)
      throw std::invalid_argument("bracket: vector length differs from algebra dimension");
    std::vector<V> out(dim_, V(0));
    for (const auto& t : terms_) {
      if (is_zero_generic(v[t.i]) || is_zero_generic(w[t.j])) continue;
      out[t.k] += V(t.value) * v[t.i] * w[t.j];
    }
    return out;
  }

  Matrix<S> ad_matrix(const std::vector<S>& v) const {
    if (v.size() != dim_) throw std::invalid_argument("ad_matrix: wrong vector length");
    Matrix<S> m(dim_);
    for (const auto& t : terms_) m(t.k, t.j) += v[t.i] * t.value;
    return m;
  }

  std::vector<S> basis_vector(std::size_t i) const {
    std::vector<S> e(dim_, S(0));
    e[i] = S(1);
    return e;
  }

  /// Smallest k such that every bracket of length k + 1 vanishes, or 0 when
  /// the algebra is not nilpotent.
  std::size_t nilpotency_step() const {
    // lower central series by span dimension of iterated brackets
    std::vector<std::vector<S>> current;
    for (std::size_t i = 0; i < dim_; ++i) current.push_back(basis_vector(i));
    for (std::size_t step = 1; step <= dim_ + 1; ++step) {
      std::vector<std::vector<S>> next;
      for (std::size_t i = 0; i < dim_; ++i)
        for (const auto& w : current) {
          auto b = bracket(basis_vector(i), w);
          if (std::any_of(b.begin(), b.end(), [](const S& x) { return !is_zero(x); }))
            next.push_back(std::move(b));
        }
      if (next.empty()) return step;
      next = reduce_basis(next);
      if (next.size() == current.size()) return 0;
      current = std::move(next);
    }
    return 0;
  }

  template <class T>
  LieAlgebra<T> cast() const {
    LieAlgebra<T> out(dim_, names_);
    for (const auto& t : terms_) {
      if constexpr (std::is_same_v<T, double>) {
        out.set_raw(t.i, t.j, t.k, to_double(t.value));
      } else {
        out.set_raw(t.i, t.j, t.k, T(t.value));
      }
    }
    return out;
  }

 private:
  template <class V>
  static bool is_zero_generic(const V& x) {
    if constexpr (std::is_same_v<V, double> || std::is_same_v<V, Rational>) {
      return is_zero(x);
    } else if constexpr (requires { x.is_zero(); }) {
      return x.is_zero();
    } else {
      return false;
    }
  }

  static std::vector<std::vector<S>> reduce_basis(std::vector<std::vector<S>> rows) {
    // Gaussian elimination keeping a basis of the span
    std::vector<std::vector<S>> basis;
    for (auto& r : rows) {
      for (const auto& b : basis) {
        std::size_t p = 0;
        while (is_zero(b[p])) ++p;
        if (!is_zero(r[p])) {
          S f = r[p] / b[p];
          for (std::size_t q = 0; q < r.size(); ++q) r[q] -= f * b[q];
        }
      }
      if (std::any_of(r.begin(), r.end(), [](const S& x) { return abs_value(to_double_generic(x)) > 1e-12; }))
        basis.push_back(r);
    }
    return basis;
  }
  static double to_double_generic(const S& x) { return to_double(x); }

  void check_index(std::size_t i) const {
    if (i >= dim_) throw std::out_of_range("basis index out of range");
  }
  void rebuild() {
    terms_.clear();
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        for (std::size_t k = 0; k < dim_; ++k)
          if (!is_zero(c_(i, j, k))) terms_.push_back({i, j, k, c_(i, j, k)});
  }

  std::size_t dim_ = 0;
  std::vector<std::string> names_;
  Tensor3<S> c_;
  std::vector<Term> terms_;
};

struct Violation {
  std::string kind;
  std::vector<std::size_t> indices;  // 1-indexed, as written in spec files
  double residual;
  std::string to_string() const {
    std::ostringstream os;
    os << kind << " at (";
    for (std::size_t i = 0; i < indices.size(); ++i) os << (i ? "," : "") << indices[i];
    os << ") residual " << residual;
    return os.str();
  }
};

using ValidationReport = std::vector<Violation>;

template <class S>
ValidationReport validate_algebra(const LieAlgebra<S>& alg) {
  ValidationReport rep;
  std::size_t n = alg.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        S r = alg.c(i, j, k) + alg.c(j, i, k);
        if (!is_zero(r)) rep.push_back({"antisymmetry", {i + 1, j + 1, k + 1}, std::abs(to_double(r))});
      }
  // Jacobi: [e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]] = 0
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t l = j + 1; l < n; ++l) {
        auto ei = alg.basis_vector(i), ej = alg.basis_vector(j), el = alg.basis_vector(l);
        auto a = alg.bracket(ei, alg.bracket(ej, el));
        auto b = alg.bracket(ej, alg.bracket(el, ei));
        auto c = alg.bracket(el, alg.bracket(ei, ej));
        for (std::size_t k = 0; k < n; ++k) {
          S r = a[k] + b[k] + c[k];
          if (!is_zero(r)) rep.push_back({"jacobi", {i + 1, j + 1, l + 1, k + 1}, std::abs(to_double(r))});
        }
      }
  return rep;
}

/// Layers of 0-indexed basis indices; layer j (0-based) has weight j + 1.
struct Stratification {
  std::vector<std::vector<std::size_t>> layers;

  std::size_t step() const { return layers.size(); }
  std::size_t first_layer_size() const { return layers.empty() ? 0 : layers.front().size(); }

  /// weight of each basis index
  std::vector<int> weights(std::size_t dim) const {
    std::vector<int> w(dim, 0);
    for (std::size_t l = 0; l < layers.size(); ++l)
      for (auto i : layers[l])
        if (i < dim) w[i] = static_cast<int>(l + 1);
    return w;
  }
};

inline int homogeneous_dimension(const Stratification& s) {
  int q = 0;
  for (std::size_t l = 0; l < s.layers.size(); ++l) q += static_cast<int>((l + 1) * s.layers[l].size());
  return q;
}

inline std::size_t numeric_rank(std::vector<std::vector<double>> rows) {
  if (rows.empty()) return 0;
  std::size_t cols = rows[0].size(), rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (std::abs(rows[r][c]) > std::abs(rows[piv][c])) piv = r;
    if (std::abs(rows[piv][c]) < 1e-12) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank) continue;
      double f = rows[r][c] / rows[rank][c];
      for (std::size_t q = 0; q < cols; ++q) rows[r][q] -= f * rows[rank][q];
    }
    ++rank;
  }
  return rank;
}

template <class S>
ValidationReport verify_stratification(const LieAlgebra<S>& alg, const Stratification& s) {
  ValidationReport rep;
  std::size_t n = alg.dim();
  std::vector<int> seen(n, 0);
  for (const auto& layer : s.layers)
    for (auto i : layer) {
      if (i >= n) {
        rep.push_back({"index out of range", {i + 1}, 0.0});
        continue;
      }
      seen[i]++;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i] != 1) rep.push_back({"not a partition", {i + 1}, static_cast<double>(seen[i])});
  if (!rep.empty()) return rep;
  for (const auto& layer : s.layers)
    if (layer.empty()) rep.push_back({"empty layer", {}, 0.0});
  if (!rep.empty()) return rep;

  auto w = s.weights(n);
  std::size_t k = s.step();
  // [layer_a, layer_b] must land in layer_{a+b}
  for (const auto& t : alg.terms()) {
    int target = w[t.i] + w[t.j];
    if (w[t.k] != target)
      rep.push_back({"grading", {t.i + 1, t.j + 1, t.k + 1}, std::abs(to_double(t.value))});
  }
  // [layer_1, layer_j] spans layer_{j+1}
  for (std::size_t j = 1; j < k; ++j) {
    std::vector<std::vector<double>> rows;
    for (auto a : s.layers[0])
      for (auto b : s.layers[j - 1]) {
        auto br = alg.bracket(alg.basis_vector(a), alg.basis_vector(b));
        std::vector<double> r;
        for (auto idx : s.layers[j]) r.push_back(to_double(br[idx]));
        rows.push_back(r);
      }
    std::size_t rank = numeric_rank(rows);
    if (rank != s.layers[j].size())
      rep.push_back({"layer not spanned", {j + 1, j + 2}, static_cast<double>(s.layers[j].size() - rank)});
  }
  return rep;
}

template <class S, class V>
std::vector<V> dilation(const Stratification& s, const S& scale, const std::vector<V>& x) {
  if (!(to_double(scale) > 0)) throw std::invalid_argument("dilation factor must be positive");
  auto w = s.weights(x.size());
  std::vector<V> out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    S f(1);
    for (int p = 0; p < w[i]; ++p) f *= scale;
    out[i] = V(f) * x[i];
  }
  return out;
}

/// Group law in exponential coordinates. Exact for nilpotent step <= 4.
template <class S>
class BchProduct {
 public:
  explicit BchProduct(const LieAlgebra<S>& alg) : alg_(&alg) {
    std::size_t st = alg.nilpotency_step();
    if (st == 0 || st > 4)
      throw UnsupportedStep("BCH product needs a nilpotent algebra of step at most 4");
    step_ = st;
  }
  std::size_t step() const { return step_; }

  template <class V>
  std::vector<V> operator()(const std::vector<V>& x, const std::vector<V>& y) const {
    const auto& a = *alg_;
    std::vector<V> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + y[k];
    if (step_ == 1) return out;
    auto xy = a.bracket(x, y);
    add(out, xy, V(ratio<S>(1, 2)));
    if (step_ == 2) return out;
    auto xxy = a.bracket(x, xy);
    auto yyx = a.bracket(y, a.bracket(y, x));
    add(out, xxy, V(ratio<S>(1, 12)));
    add(out, yyx, V(ratio<S>(1, 12)));
    if (step_ == 3) return out;
    add(out, a.bracket(y, xxy), V(ratio<S>(-1, 24)));
    return out;
  }

 private:
  template <class V>
  static void add(std::vector<V>& out, const std::vector<V>& t, const V& f) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += f * t[k];
  }
  const LieAlgebra<S>* alg_;
  std::size_t step_ = 0;
};

template <class S, class V>
std::vector<V> bch_product(const LieAlgebra<S>& alg, const std::vector<V>& x, const std::vector<V>& y) {
  return BchProduct<S>(alg)(x, y);
}

namespace builtin {

template <class S>
LieAlgebra<S> abelian(std::size_t n) {
  return LieAlgebra<S>(n);
}

template <class S>
LieAlgebra<S> heisenberg() {
  LieAlgebra<S> a(3, {"X", "Y", "Z"});
  a.set_bracket(0, 1, 2, S(1));
  return a;
}

template <class S>
LieAlgebra<S> engel() {
  LieAlgebra<S> a(4);
  a.set_bracket(0, 1, 2, S(1));
  a.set_bracket(0, 2, 3, S(1));
  return a;
}

template <class S>
LieAlgebra<S> su2() {
  LieAlgebra<S> a(3, {"A1", "A2", "A3"});
  a.set_bracket(0, 1, 2, S(1));
  a.set_bracket(2, 0, 1, S(1));
  a.set_bracket(1, 2, 0, S(1));
  return a;
}

/// Free nilpotent algebra of rank 3 and step 2.
template <class S>
LieAlgebra<S> free_step2_rank3() {
  LieAlgebra<S> a(6);
  a.set_bracket(0, 1, 3, S(1));
  a.set_bracket(0, 2, 4, S(1));
  a.set_bracket(1, 2, 5, S(1));
  return a;
}

/// Strictly upper triangular m x m matrices, basis E_{ab} (a < b) ordered by
/// superdiagonal. Step m - 1.
template <class S>
LieAlgebra<S> strict_upper_triangular(std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> units;
  for (std::size_t d = 1; d < m; ++d)
    for (std::size_t a = 0; a + d < m; ++a) units.push_back({a, a + d});
  auto index = [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < units.size(); ++i)
      if (units[i].first == a && units[i].second == b) return i;
    throw std::logic_error("not a strictly upper unit");
  };
  std::vector<std::string> names;
  for (auto [a, b] : units) names.push_back("E" + std::to_string(a + 1) + std::to_string(b + 1));
  LieAlgebra<S> alg(units.size(), names);
  for (std::size_t i = 0; i < units.size(); ++i)
    for (std::size_t j = 0; j < units.size(); ++j) {
      auto [a, b] = units[i];
      auto [c, d] = units[j];
      // [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
      if (b == c) alg.set_raw(i, j, index(a, d), alg.c(i, j, index(a, d)) + S(1));
      if (d == a) alg.set_raw(i, j, index(c, b), alg.c(i, j, index(c, b)) - S(1));
    }
  return alg;
}

inline Stratification heisenberg_strat() { return {{{0, 1}, {2}}}; }
inline Stratification engel_strat() { return {{{0, 1}, {2}, {3}}}; }
inline Stratification abelian_strat(std::size_t n) {
  Stratification s;
  s.layers.emplace_back();
  for (std::size_t i = 0; i < n; ++i) s.layers[0].push_back(i);
  return s;
}
inline Stratification free_step2_rank3_strat() { return {{{0, 1, 2}, {3, 4, 5}}}; }

}  // namespace builtin

}  // namespace subriem
