#pragma once

#include "subriem/connection.hpp"
#include "subriem/curvature.hpp"
#include "subriem/frame.hpp"
#include "subriem/poly.hpp"
#include "subriem/poly_fields.hpp"

#include <cstddef>
#include <random>
#include <vector>

namespace subriem {

/// Left-invariant frame fields together with the constant frame data, the
/// setting in which operator identities reduce to polynomial algebra.
template <class S>
struct IdentityContext {
  SubRiemannianStructure<S> srs;
  PolyFrame<S> frame;
  FramePoint<S> fp;

  explicit IdentityContext(SubRiemannianStructure<S> s, Taming taming = Taming::left_invariant)
      : srs(std::move(s)), frame(srs, taming), fp(frame_from_structure(srs)) {}

  std::size_t n() const { return fp.n; }
  std::size_t nh() const { return fp.nh; }

  /// frame components (F_k f)
  PolyOneForm<S> d(const Poly<S>& f) const {
    PolyOneForm<S> out;
    for (const auto& field : frame.fields) out.push_back(apply_field(field, f));
    return out;
  }

  PolyOneForm<S> covariant(const FrameConnection<S>& conn, std::size_t i, const PolyOneForm<S>& alpha) const {
    PolyOneForm<S> out(n());
    for (std::size_t k = 0; k < n(); ++k) {
      out[k] = apply_field(frame.fields[i], alpha[k]);
      for (std::size_t m = 0; m < n(); ++m) {
        const S& g = conn.gamma(i, k, m).value();
        if (!is_zero(g)) out[k] -= Poly<S>(g) * alpha[m];
      }
    }
    return out;
  }

  /// Rough sub-Laplacian on one-forms: sum_a (nabla^2 alpha)(A_a, A_a).
  PolyOneForm<S> rough_laplacian(const FrameConnection<S>& conn, const PolyOneForm<S>& alpha) const {
    PolyOneForm<S> out(n());
    std::vector<PolyOneForm<S>> first;
    for (std::size_t i = 0; i < n(); ++i) first.push_back(covariant(conn, i, alpha));
    for (std::size_t a = 0; a < nh(); ++a) {
      auto second = covariant(conn, a, first[a]);
      for (std::size_t k = 0; k < n(); ++k) out[k] += second[k];
      for (std::size_t m = 0; m < n(); ++m) {
        const S& g = conn.gamma(a, a, m).value();
        if (is_zero(g)) continue;
        for (std::size_t k = 0; k < n(); ++k) out[k] -= Poly<S>(g) * first[m][k];
      }
    }
    return out;
  }

  /// Rough sub-Laplacian on functions.
  Poly<S> rough_laplacian(const FrameConnection<S>& conn, const Poly<S>& f) const {
    auto df = d(f);
    Poly<S> out;
    for (std::size_t a = 0; a < nh(); ++a) {
      out += apply_field(frame.fields[a], df[a]);
      for (std::size_t m = 0; m < n(); ++m) {
        const S& g = conn.gamma(a, a, m).value();
        if (!is_zero(g)) out -= Poly<S>(g) * df[m];
      }
    }
    return out;
  }

  PolyOneForm<S> apply_matrix(const Matrix<S>& m, const PolyOneForm<S>& alpha) const {
    PolyOneForm<S> out(n());
    for (std::size_t b = 0; b < n(); ++b)
      for (std::size_t l = 0; l < n(); ++l)
        if (!is_zero(m(b, l))) out[b] += Poly<S>(m(b, l)) * alpha[l];
    return out;
  }
};

/// (L(hat nabla) - Ric(nabla)) df - d(L(hat nabla) f); zero for connections compatible with g_H^*.
template <class S>
PolyOneForm<S> weitzenbock_residual(const IdentityContext<S>& ctx, const FrameConnection<S>& conn,
                                    const Poly<S>& f) {
  auto hat = adjoint_connection(ctx.fp, conn);
  auto ric = ricci(ctx.fp, conn);
  auto df = ctx.d(f);
  auto lhs = ctx.rough_laplacian(hat, df);
  auto rdf = ctx.apply_matrix(ric, df);
  auto dl = ctx.d(ctx.rough_laplacian(hat, f));
  for (std::size_t k = 0; k < ctx.n(); ++k) lhs[k] -= rdf[k] + dl[k];
  return lhs;
}

/// L df - dLf + 2 D^m df - A(df) with L = L(nabla) and
/// D^m alpha (E_b) = sum_a alpha(nabla_a ...)(T(A_a, E_b)).
template <class S>
PolyOneForm<S> metric_torsion_residual(const IdentityContext<S>& ctx, const FrameConnection<S>& conn,
                                       const Poly<S>& f) {
  std::size_t n = ctx.n();
  auto t = torsion(ctx.fp, conn);
  auto a = script_A(ctx.fp, conn).via_nabla;
  auto df = ctx.d(f);
  auto out = ctx.rough_laplacian(conn, df);
  auto dl = ctx.d(ctx.rough_laplacian(conn, f));
  auto adf = ctx.apply_matrix(a, df);
  for (std::size_t k = 0; k < n; ++k) out[k] -= dl[k] + adf[k];
  for (std::size_t i = 0; i < ctx.nh(); ++i) {
    auto nab = ctx.covariant(conn, i, df);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t k = 0; k < n; ++k) {
        const S& tv = t(i, b, k).value();
        if (!is_zero(tv)) out[b] += Poly<S>(S(2) * tv) * nab[k];
      }
  }
  return out;
}

template <class S>
Poly<S> commutation_residual(const PolyFrame<S>& frame, const Poly<S>& f) {
  return full_laplacian_poly(frame, sub_laplacian_poly(frame, f)) -
         sub_laplacian_poly(frame, full_laplacian_poly(frame, f));
}

template <class S>
Poly<S> dilation_residual(const PolyFrame<S>& frame, const Stratification& strat, const Poly<S>& f, const S& s) {
  std::size_t n = frame.fields.size();
  auto lhs = sub_laplacian_poly(frame, compose_dilation(f, strat, s, n));
  auto rhs = compose_dilation(sub_laplacian_poly(frame, f), strat, s, n);
  return lhs - Poly<S>(s * s) * rhs;
}

/// A(f o delta_s) - s^j (A f) o delta_s for every left-invariant basis field A in layer j.
template <class S>
std::vector<Poly<S>> homogeneity_residuals(const LieAlgebra<S>& alg, const Stratification& strat,
                                           const Poly<S>& f, const S& s) {
  auto fields = left_invariant_fields(alg);
  auto w = strat.weights(alg.dim());
  std::vector<Poly<S>> out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    S sj(1);
    for (int p = 0; p < w[i]; ++p) sj *= s;
    auto lhs = apply_field(fields[i], compose_dilation(f, strat, s, alg.dim()));
    auto rhs = compose_dilation(apply_field(fields[i], f), strat, s, alg.dim());
    out.push_back(lhs - Poly<S>(sj) * rhs);
  }
  return out;
}

/// Random polynomial with integer coefficients in [-3,3], total degree <= degree.
template <class S>
Poly<S> random_polynomial(std::size_t nvars, int degree, std::mt19937_64& rng, int terms = 6) {
  std::uniform_int_distribution<int> coef(-3, 3), var(0, static_cast<int>(nvars) - 1), deg(0, degree);
  Poly<S> p = Poly<S>::monomial(std::vector<int>(nvars, 0), S(0));
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(nvars, 0);
    int d = deg(rng);
    for (int q = 0; q < d; ++q) e[var(rng)]++;
    int c = coef(rng);
    if (c == 0) c = 1;
    p += Poly<S>::monomial(e, S(c));
  }
  return p;
}

}  // namespace subriem
