#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace subriem {

/// Exact rational scalar. Expression templates are disabled so that `auto`
/// is always a value in generic code.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& x) { return x.is_zero(); }

inline double abs_value(double x) { return std::abs(x); }
inline Rational abs_value(const Rational& x) { return boost::multiprecision::abs(x); }

inline double scalar_sqrt(double x) { return std::sqrt(x); }
inline Rational scalar_sqrt(const Rational& x) {
  // Only perfect squares have rational roots; anything else needs floating point.
  using boost::multiprecision::mpz_int;
  mpz_int num = boost::multiprecision::numerator(x);
  mpz_int den = boost::multiprecision::denominator(x);
  if (num < 0) throw std::domain_error("square root of a negative rational");
  mpz_int rn = boost::multiprecision::sqrt(num);
  mpz_int rd = boost::multiprecision::sqrt(den);
  if (rn * rn != num || rd * rd != den) {
    throw std::domain_error("exact arithmetic cannot take the square root of " + x.str() +
                            "; use double scalars for non-orthonormal metrics");
  }
  return Rational(rn, rd);
}

template <class S>
S from_double(double x) {
  if constexpr (is_exact_v<S>) {
    return Rational(x);
  } else {
    return static_cast<S>(x);
  }
}

template <class S>
S ratio(long num, long den) {
  if constexpr (is_exact_v<S>) {
    return Rational(num, den);
  } else {
    return static_cast<S>(num) / static_cast<S>(den);
  }
}

inline std::string to_string(double x) { return std::to_string(x); }
inline std::string to_string(const Rational& x) { return x.str(); }

}  // namespace subriem
