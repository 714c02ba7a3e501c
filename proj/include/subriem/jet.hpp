#pragma once

#include "subriem/scalar.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace subriem {

/// First-order jet of a function on the base: its value together with its
/// derivatives along the N frame vector fields, d[l] = E_l(value).
/// An empty derivative vector means every frame derivative vanishes, which
/// is the common case for left-invariant data.
template <class S>
class Jet {
 public:
  Jet() : v_(0) {}
  Jet(S v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
  Jet(S v, std::vector<S> d) : v_(std::move(v)), d_(std::move(d)) {}

  const S& value() const { return v_; }
  bool is_constant() const { return d_.empty(); }

  /// E_l applied to this function.
  S deriv(std::size_t l) const { return d_.empty() ? S(0) : d_[l]; }
  const std::vector<S>& derivs() const { return d_; }

  Jet& operator+=(const Jet& o) {
    v_ += o.v_;
    add_derivs(o.d_, S(1));
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v_ -= o.v_;
    add_derivs(o.d_, S(-1));
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    // product rule
    std::vector<S> d;
    if (!d_.empty() || !o.d_.empty()) {
      std::size_t n = d_.empty() ? o.d_.size() : d_.size();
      d.assign(n, S(0));
      for (std::size_t l = 0; l < n; ++l) d[l] = deriv(l) * o.v_ + v_ * o.deriv(l);
    }
    v_ *= o.v_;
    d_ = std::move(d);
    return *this;
  }
  Jet& scale(const S& s) {
    v_ *= s;
    for (auto& x : d_) x *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator*(const S& s, Jet a) { return a.scale(s); }
  friend Jet operator-(Jet a) { return a.scale(S(-1)); }

 private:
  void add_derivs(const std::vector<S>& od, const S& sign) {
    if (od.empty()) return;
    if (d_.empty()) d_.assign(od.size(), S(0));
    for (std::size_t l = 0; l < od.size(); ++l) d_[l] += sign * od[l];
  }

  S v_;
  std::vector<S> d_;
};

}  // namespace subriem
