#pragma once

#include "subriem/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

/// Sparse multivariate polynomial. A polynomial with zero variables is a
/// constant that combines with polynomials in any number of variables.
template <class S>
class Poly {
 public:
  using Exponent = std::vector<int>;

  Poly() = default;
  Poly(S c) {  // NOLINT(google-explicit-constructor)
    if (!subriem::is_zero(c)) terms_[Exponent{}] = std::move(c);
  }
  Poly(int c) : Poly(S(c)) {}  // NOLINT(google-explicit-constructor)

  static Poly variable(std::size_t nvars, std::size_t i) {
    Poly p;
    p.nvars_ = nvars;
    Exponent e(nvars, 0);
    e.at(i) = 1;
    p.terms_[e] = S(1);
    return p;
  }
  static Poly monomial(const Exponent& e, S c) {
    Poly p;
    p.nvars_ = e.size();
    if (!subriem::is_zero(c)) p.terms_[e] = std::move(c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponent, S>& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  S constant_term() const {
    for (const auto& [e, c] : terms_) {
      bool zero = true;
      for (int x : e) zero = zero && x == 0;
      if (zero) return c;
    }
    return S(0);
  }

  Poly& operator+=(const Poly& o) {
    std::size_t n = unify(o);
    for (const auto& [e, c] : o.terms_) accumulate(pad(e, n), c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    std::size_t n = unify(o);
    for (const auto& [e, c] : o.terms_) accumulate(pad(e, n), -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(const Poly& a) { return Poly() - a; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    out.nvars_ = std::max(a.nvars_, b.nvars_);
    std::size_t n = out.nvars_;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponent e = pad(ea, n);
        Exponent f = pad(eb, n);
        for (std::size_t i = 0; i < n; ++i) e[i] += f[i];
        out.accumulate(e, ca * cb);
      }
    return out;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  friend bool operator==(const Poly& a, const Poly& b) { return (a - b).is_zero(); }

  Poly pow(int k) const {
    if (k < 0) throw std::invalid_argument("negative polynomial power");
    Poly r(S(1));
    for (int i = 0; i < k; ++i) r *= *this;
    return r;
  }

  Poly derivative(std::size_t var) const {
    Poly out;
    out.nvars_ = nvars_;
    for (const auto& [e, c] : terms_) {
      if (var >= e.size() || e[var] == 0) continue;
      Exponent f = e;
      f[var] -= 1;
      out.accumulate(f, c * S(e[var]));
    }
    return out;
  }

  /// Substitute x_i -> s_i x_i.
  Poly scale_variables(const std::vector<S>& s) const {
    Poly out;
    out.nvars_ = nvars_;
    for (const auto& [e, c] : terms_) {
      S f = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int p = 0; p < e[i]; ++p) f *= s.at(i);
      out.accumulate(e, f);
    }
    return out;
  }

  template <class T>
  T evaluate(const std::vector<T>& x) const {
    T acc(0);
    for (const auto& [e, c] : terms_) {
      T m;
      if constexpr (std::is_same_v<T, double>) {
        m = to_double(c);
      } else {
        m = T(c);
      }
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int p = 0; p < e[i]; ++p) m *= x.at(i);
      acc += m;
    }
    return acc;
  }

  Poly<double> to_double_poly() const {
    Poly<double> out;
    for (const auto& [e, c] : terms_) out += Poly<double>::monomial(e, to_double(c));
    return out;
  }

  double max_abs_coefficient() const {
    double m = 0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(to_double(c)));
    return m;
  }

  /// Canonical form: terms sorted by exponent, "coeff*x1^a*x2^b".
  std::string to_string(const std::vector<std::string>& names = {}) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << subriem::to_string(c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        os << "*" << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
        if (e[i] > 1) os << "^" << e[i];
      }
    }
    return os.str();
  }

 private:
  static Exponent pad(const Exponent& e, std::size_t n) {
    if (e.size() == n) return e;
    if (!e.empty() && e.size() != n) throw std::invalid_argument("polynomial variable count mismatch");
    return Exponent(n, 0);
  }
  std::size_t unify(const Poly& o) {
    if (nvars_ == o.nvars_ || o.nvars_ == 0) return nvars_;
    if (nvars_ != 0) throw std::invalid_argument("polynomial variable count mismatch");
    nvars_ = o.nvars_;
    std::map<Exponent, S> t;
    for (auto& [e, c] : terms_) t[pad(e, nvars_)] = c;
    terms_ = std::move(t);
    return nvars_;
  }
  void accumulate(const Exponent& e, const S& c) {
    if (subriem::is_zero(c)) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
      return;
    }
    it->second += c;
    if (subriem::is_zero(it->second)) terms_.erase(it);
  }

  std::size_t nvars_ = 0;
  std::map<Exponent, S> terms_;
};

/// Components along the coordinate fields d/dx^a.
template <class S>
using PolyVectorField = std::vector<Poly<S>>;

/// Components on a chosen frame (coordinate or left-invariant).
template <class S>
using PolyOneForm = std::vector<Poly<S>>;

template <class S>
Poly<S> apply_field(const PolyVectorField<S>& X, const Poly<S>& f) {
  Poly<S> out;
  for (std::size_t a = 0; a < X.size(); ++a) {
    if (X[a].is_zero()) continue;
    if (f.nvars() != 0 && f.nvars() != X.size())
      throw std::invalid_argument("apply_field: variable count mismatch");
    out += X[a] * f.derivative(a);
  }
  return out;
}

template <class S>
PolyVectorField<S> field_bracket(const PolyVectorField<S>& X, const PolyVectorField<S>& Y) {
  if (X.size() != Y.size()) throw std::invalid_argument("field_bracket: dimension mismatch");
  PolyVectorField<S> out(X.size());
  for (std::size_t a = 0; a < X.size(); ++a) out[a] = apply_field(X, Y[a]) - apply_field(Y, X[a]);
  return out;
}

template <class S>
bool is_zero_form(const std::vector<Poly<S>>& v) {
  for (const auto& p : v)
    if (!p.is_zero()) return false;
  return true;
}

template <class S>
double max_abs_coefficient(const std::vector<Poly<S>>& v) {
  double m = 0;
  for (const auto& p : v) m = std::max(m, p.max_abs_coefficient());
  return m;
}

}  // namespace subriem
