#pragma once

#include "subriem/frame.hpp"
#include "subriem/jet.hpp"
#include "subriem/sr_structure.hpp"
#include "subriem/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

namespace subriem {

/// Connection coefficients nabla_{E_i} E_j = sum_k gamma(i,j,k) E_k.
template <class S>
struct FrameConnection {
  std::string name;
  Tensor3<Jet<S>> gamma;
};

template <class S>
using JetTensor = Tensor3<Jet<S>>;

template <class S>
FrameConnection<S> flat_connection(const FramePoint<S>& fp) {
  return {"flat", JetTensor<S>(fp.n)};
}

/// Koszul formula in an orthonormal frame.
template <class S>
FrameConnection<S> levi_civita(const FramePoint<S>& fp) {
  std::size_t n = fp.n;
  JetTensor<S> g(n);
  S half = ratio<S>(1, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        g(i, j, k) = half * (fp.c(i, j, k) - fp.c(j, k, i) + fp.c(k, i, j));
  return {"levi-civita", std::move(g)};
}

template <class S>
JetTensor<S> torsion(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  std::size_t n = fp.n;
  JetTensor<S> t(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        t(i, j, k) = conn.gamma(i, j, k) - conn.gamma(j, i, k) - fp.c(i, j, k);
  return t;
}

/// hat nabla_A B = nabla_A B - T(A,B) = nabla_B A + [A,B].
template <class S>
FrameConnection<S> adjoint_connection(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  std::size_t n = fp.n;
  JetTensor<S> g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) g(i, j, k) = conn.gamma(j, i, k) + fp.c(i, j, k);
  return {"adjoint of " + conn.name, std::move(g)};
}

/// Curvature R(A,B) = pr_V [pr_H A, pr_H B] and cocurvature
/// Rbar(A,B) = pr_H [pr_V A, pr_V B], as frame components.
template <class S>
std::pair<JetTensor<S>, JetTensor<S>> curvature_cocurvature(const FramePoint<S>& fp) {
  std::size_t n = fp.n;
  JetTensor<S> r(n), rb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (fp.horizontal(i) && fp.horizontal(j) && fp.vertical(k)) r(i, j, k) = fp.c(i, j, k);
        if (fp.vertical(i) && fp.vertical(j) && fp.horizontal(k)) rb(i, j, k) = fp.c(i, j, k);
      }
  return {std::move(r), std::move(rb)};
}

/// Torsion three-form: cyclic sum of <R(A,B),C> plus cyclic sum of <Rbar(A,B),C>.
template <class S>
JetTensor<S> zeta_form(const FramePoint<S>& fp) {
  auto [r, rb] = curvature_cocurvature(fp);
  std::size_t n = fp.n;
  JetTensor<S> z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        z(i, j, k) = r(i, j, k) + r(j, k, i) + r(k, i, j) + rb(i, j, k) + rb(j, k, i) + rb(k, i, j);
  return z;
}

/// II(A,B) from the Lie derivative of the metric: for A,B horizontal the
/// vertical components, for A,B vertical the horizontal components.
/// II(E_a,E_b)^z = (c_za^b + c_zb^a) / 2, which vanishes iff the mixed Lie
/// derivatives of the metric vanish.
template <class S>
Tensor3<S> ii_tensor(const FramePoint<S>& fp) {
  std::size_t n = fp.n;
  Tensor3<S> ii(n);
  S half = ratio<S>(1, 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t z = 0; z < n; ++z) {
        bool hh = fp.horizontal(a) && fp.horizontal(b) && fp.vertical(z);
        bool vv = fp.vertical(a) && fp.vertical(b) && fp.horizontal(z);
        if (hh || vv) ii(a, b, z) = half * (fp.c(z, a, b).value() + fp.c(z, b, a).value());
      }
  return ii;
}

template <class S>
double max_abs(const Tensor3<S>& t) {
  double m = 0;
  std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(to_double(t(i, j, k))));
  return m;
}

template <class S>
double max_abs(const JetTensor<S>& t, bool include_derivatives = false) {
  double m = 0;
  std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        m = std::max(m, std::abs(to_double(t(i, j, k).value())));
        if (include_derivatives)
          for (const auto& d : t(i, j, k).derivs()) m = std::max(m, std::abs(to_double(d)));
      }
  return m;
}

/// nabla = nabla^g - (1/2) sharp iota zeta. Requires II = 0.
template <class S>
FrameConnection<S> canonical_connection(const FramePoint<S>& fp, double tol = 1e-12) {
  auto ii = ii_tensor(fp);
  std::ostringstream bad;
  std::size_t n = fp.n, count = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      for (std::size_t z = 0; z < n; ++z)
        if (std::abs(to_double(ii(a, b, z))) > tol) {
          if (count++ < 8) bad << " II(" << a + 1 << "," << b + 1 << ")^" << z + 1 << "=" << to_double(ii(a, b, z));
        }
  if (count) throw PreconditionViolated("canonical connection needs II = 0; nonzero entries:" + bad.str());
  auto lc = levi_civita(fp);
  auto z = zeta_form(fp);
  S half = ratio<S>(1, 2);
  JetTensor<S> g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) g(i, j, k) = lc.gamma(i, j, k) - half * z(i, j, k);
  return {"canonical", std::move(g)};
}

/// Projected Levi-Civita on H and V, brackets on the mixed terms.
template <class S>
FrameConnection<S> bott_connection(const FramePoint<S>& fp) {
  auto lc = levi_civita(fp);
  std::size_t n = fp.n;
  JetTensor<S> g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        bool same_ij = fp.horizontal(i) == fp.horizontal(j);
        bool same_jk = fp.horizontal(j) == fp.horizontal(k);
        if (same_ij) {
          if (same_jk) g(i, j, k) = lc.gamma(i, j, k);
        } else if (same_jk) {
          // nabla_A B = pr [A, B] for A and B in complementary subbundles
          g(i, j, k) = fp.c(i, j, k);
        }
      }
  return {"bott", std::move(g)};
}

/// nabla'_{Z1} Z2 = nabla_{Z1} Z2 + lambda(Z2) Z1 + sharp^H iota_{Z1 ^ Z2} beta.
/// lambda[j] is the endomorphism lambda(E_j), acting as lambda[j](k, i) on E_i.
template <class S>
FrameConnection<S> perturbed_connection(const FramePoint<S>& fp, const FrameConnection<S>& base,
                                        const std::vector<Matrix<S>>& lambda, const Tensor3<S>& beta,
                                        double tol = 1e-12) {
  std::size_t n = fp.n;
  std::ostringstream err;
  if (lambda.size() != n || beta.size() != n) throw std::invalid_argument("perturbation sizes do not match frame");
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double v = to_double(lambda[j](a, b));
        if (fp.horizontal(j) && std::abs(v) > tol)
          err << " lambda(E" << j + 1 << ") nonzero on H at (" << a + 1 << "," << b + 1 << ")";
        if (std::abs(v + to_double(lambda[j](b, a))) > tol)
          err << " lambda(E" << j + 1 << ") not antisymmetric at (" << a + 1 << "," << b + 1 << ")";
      }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double v = to_double(beta(i, j, k));
        if (std::abs(v) <= tol) continue;
        if (fp.vertical(i) || fp.vertical(j) || fp.vertical(k))
          err << " beta nonzero on V at (" << i + 1 << "," << j + 1 << "," << k + 1 << ")";
        if (std::abs(v + to_double(beta(j, i, k))) > tol || std::abs(v + to_double(beta(i, k, j))) > tol)
          err << " beta not alternating at (" << i + 1 << "," << j + 1 << "," << k + 1 << ")";
      }
  if (!err.str().empty()) throw PreconditionViolated("inadmissible perturbation:" + err.str());
  JetTensor<S> g = base.gamma;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        S add = lambda[j](k, i);
        if (fp.horizontal(k)) add += beta(i, j, k);
        g(i, j, k) += Jet<S>(add);
      }
  return {base.name + " perturbed", std::move(g)};
}

struct CompatibilityReport {
  double h_preservation = 0;  // vertical components of nabla_Z A, A horizontal
  double h_metric = 0;        // g_H metric residual on horizontal pairs
  double g_metric = 0;        // full metric residual
  bool compatible(double tol) const { return h_preservation <= tol && h_metric <= tol; }
  bool metric(double tol) const { return g_metric <= tol; }
};

template <class S>
CompatibilityReport check_compatible(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  CompatibilityReport rep;
  std::size_t n = fp.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        // orthonormal frame: Z<E_j,E_k> = 0, so metric means gamma_ij^k + gamma_ik^j = 0
        double m = std::abs(to_double(conn.gamma(i, j, k).value() + conn.gamma(i, k, j).value()));
        rep.g_metric = std::max(rep.g_metric, m);
        if (fp.horizontal(j) && fp.horizontal(k)) rep.h_metric = std::max(rep.h_metric, m);
        if (fp.horizontal(j) && fp.vertical(k))
          rep.h_preservation = std::max(rep.h_preservation, std::abs(to_double(conn.gamma(i, j, k).value())));
      }
  return rep;
}

/// tr T(v, .) for every frame vector v.
template <class S>
std::vector<S> torsion_trace(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  auto t = torsion(fp, conn);
  std::vector<S> tr(fp.n, S(0));
  for (std::size_t v = 0; v < fp.n; ++v)
    for (std::size_t k = 0; k < fp.n; ++k) tr[v] += t(v, k, k).value();
  return tr;
}

}  // namespace subriem
