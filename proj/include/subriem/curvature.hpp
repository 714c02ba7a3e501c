#pragma once

#include "subriem/connection.hpp"
#include "subriem/frame.hpp"
#include "subriem/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace subriem {

/// R(E_i,E_j)E_k = sum_l R(i,j,k,l) E_l.
template <class S>
Tensor4<S> curvature_tensor(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  std::size_t n = fp.n;
  const auto& g = conn.gamma;
  Tensor4<S> r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          S acc = g(j, k, l).deriv(i) - g(i, k, l).deriv(j);
          for (std::size_t m = 0; m < n; ++m) {
            acc += g(j, k, m).value() * g(i, m, l).value() - g(i, k, m).value() * g(j, m, l).value();
            acc -= fp.c(i, j, m).value() * g(m, k, l).value();
          }
          r(i, j, k, l) = acc;
          r(j, i, k, l) = -acc;
        }
  return r;
}

/// Ricci operator on covector components: (Ric alpha)_b = sum_l M(b,l) alpha_l
/// with Ric(alpha)(v) = tr_H (R(., v) alpha)(.) and (R(X,Y)alpha)(Z) = -alpha(R(X,Y)Z).
template <class S>
Matrix<S> ricci_from_curvature(const FramePoint<S>& fp, const Tensor4<S>& r, bool full_trace = false) {
  std::size_t n = fp.n;
  Matrix<S> m(n);
  std::size_t trace_end = full_trace ? n : fp.nh;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t l = 0; l < n; ++l) {
      S acc(0);
      for (std::size_t a = 0; a < trace_end; ++a) acc -= r(a, b, a, l);
      m(b, l) = acc;
    }
  return m;
}

template <class S>
Matrix<S> ricci(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  return ricci_from_curvature(fp, curvature_tensor(fp, conn));
}

/// Riemannian Ricci form Ric_g(E_b, E_l) of the Levi-Civita connection.
template <class S>
Matrix<S> riemannian_ricci(const FramePoint<S>& fp) {
  auto lc = levi_civita(fp);
  return ricci_from_curvature(fp, curvature_tensor(fp, lc), true);
}

template <class S>
std::pair<Matrix<S>, Matrix<S>> ricci_split(const Matrix<S>& m) {
  std::size_t n = m.size();
  Matrix<S> s(n), a(n);
  S half = ratio<S>(1, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      s(i, j) = half * (m(i, j) + m(j, i));
      a(i, j) = half * (m(i, j) - m(j, i));
    }
  return {s, a};
}

/// Covariant derivative (nabla_i zeta)(x,y,z) of a three-tensor of jets.
template <class S>
S covariant_derivative3(const JetTensor<S>& t, const FrameConnection<S>& conn, std::size_t i, std::size_t x,
                        std::size_t y, std::size_t z) {
  std::size_t n = t.size();
  const auto& g = conn.gamma;
  S acc = t(x, y, z).deriv(i);
  for (std::size_t m = 0; m < n; ++m) {
    acc -= g(i, x, m).value() * t(m, y, z).value();
    acc -= g(i, y, m).value() * t(x, m, z).value();
    acc -= g(i, z, m).value() * t(x, y, m).value();
  }
  return acc;
}

/// Antisymmetric part of Ric through 2 <Ric^a alpha, beta> = tr_H (nabla zeta)(., #alpha, #beta).
template <class S>
Matrix<S> ric_a_via_zeta(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  auto z = zeta_form(fp);
  std::size_t n = fp.n;
  Matrix<S> a(n);
  S half = ratio<S>(1, 2);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t l = 0; l < n; ++l) {
      S acc(0);
      for (std::size_t i = 0; i < fp.nh; ++i) acc += covariant_derivative3(z, conn, i, i, l, b);
      a(b, l) = half * acc;
    }
  return a;
}

/// Two-form C(v,w) = tr Rbar(v, R(w,.)) - tr Rbar(w, R(v,.)) as jets.
template <class S>
std::vector<Jet<S>> c_form(const FramePoint<S>& fp) {
  auto [r, rb] = curvature_cocurvature(fp);
  std::size_t n = fp.n;
  std::vector<Jet<S>> c(n * n);
  auto one = [&](std::size_t v, std::size_t w) {
    Jet<S> acc;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t m = fp.nh; m < n; ++m) acc += r(w, a, m) * rb(v, m, a);
    return acc;
  };
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w) c[v * n + w] = one(v, w) - one(w, v);
  return c;
}

/// Codifferential of a two-form eta (row-major jets):
/// delta eta = - sum_i iota_{E_i} nabla_{E_i} eta + iota_T^* eta.
template <class S>
std::vector<S> codifferential(const FramePoint<S>& fp, const FrameConnection<S>& conn,
                              const std::vector<Jet<S>>& eta) {
  std::size_t n = fp.n;
  const auto& g = conn.gamma;
  auto t = torsion(fp, conn);
  auto e = [&](std::size_t a, std::size_t b) -> const Jet<S>& { return eta[a * n + b]; };
  std::vector<S> out(n, S(0));
  S half = ratio<S>(1, 2);
  for (std::size_t b = 0; b < n; ++b) {
    S acc(0);
    for (std::size_t i = 0; i < n; ++i) {
      S nab = e(i, b).deriv(i);
      for (std::size_t m = 0; m < n; ++m) {
        nab -= g(i, i, m).value() * e(m, b).value();
        nab -= g(i, b, m).value() * e(i, m).value();
      }
      acc -= nab;
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c) acc += half * e(a, c).value() * t(a, c, b).value();
    out[b] = acc;
  }
  return out;
}

/// psi = sum over the horizontal orthonormal frame of ad(F_i) ad(F_i).
template <class S>
Matrix<S> psi_map(const FramePoint<S>& fp) {
  std::size_t n = fp.n;
  Matrix<S> psi(n);
  for (std::size_t i = 0; i < fp.nh; ++i) {
    Matrix<S> ad(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) ad(k, j) = fp.c(i, j, k).value();
    psi = psi + ad * ad;
  }
  return psi;
}

template <class S>
bool psi_vanishes_on_h(const Matrix<S>& psi, std::size_t nh, double tol = 0) {
  for (std::size_t j = 0; j < nh; ++j)
    for (std::size_t k = 0; k < psi.size(); ++k)
      if (std::abs(to_double(psi(k, j))) > tol) return false;
  return true;
}

/// Zero-order operator of the integration-by-parts formula, computed twice:
/// line 1 from Ric(nabla) and nabla T, line 2 from Ric(hat nabla).
template <class S>
struct ScriptA {
  Matrix<S> via_nabla;
  Matrix<S> via_adjoint;
};

template <class S>
ScriptA<S> script_A(const FramePoint<S>& fp, const FrameConnection<S>& conn) {
  std::size_t n = fp.n, nh = fp.nh;
  const auto& g = conn.gamma;
  auto t = torsion(fp, conn);
  auto ric = ricci(fp, conn);
  auto ric_hat = ricci(fp, adjoint_connection(fp, conn));
  Matrix<S> tt(n), dt(n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t k = 0; k < n; ++k) {
      S quad(0), der(0);
      for (std::size_t a = 0; a < nh; ++a) {
        for (std::size_t m = 0; m < n; ++m) quad += t(a, b, m).value() * t(a, m, k).value();
        // (nabla_a T)(E_a, E_b)^k
        S d = t(a, b, k).deriv(a);
        for (std::size_t m = 0; m < n; ++m) {
          d += g(a, m, k).value() * t(a, b, m).value();
          d -= g(a, a, m).value() * t(m, b, k).value();
          d -= g(a, b, m).value() * t(a, m, k).value();
        }
        der += d;
      }
      tt(b, k) = quad;
      dt(b, k) = der;
    }
  return {ric - dt - tt, ric_hat - tt};
}

template <class S>
double max_abs(const Matrix<S>& m) {
  double r = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) r = std::max(r, std::abs(to_double(m(i, j))));
  return r;
}

inline Eigen::MatrixXd to_eigen(const Matrix<double>& m) {
  Eigen::MatrixXd e(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) e(i, j) = m(i, j);
  return e;
}

template <class S>
Matrix<double> to_double_matrix(const Matrix<S>& m) {
  Matrix<double> d(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) d(i, j) = to_double(m(i, j));
  return d;
}

/// Smallest eigenvalue of the symmetric part of the leading k x k block.
template <class S>
double min_sym_eigenvalue(const Matrix<S>& m, std::size_t k) {
  if (k == 0) return 0;
  Eigen::MatrixXd e(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) e(i, j) = 0.5 * (to_double(m(i, j)) + to_double(m(j, i)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct ConditionReport {
  double ii_residual = 0;
  double c_residual = 0;
  double deltaC_residual = 0;
  double cocurvature_norm = 0;
  double ric_a_norm = 0;
  double min_ric_h = std::numeric_limits<double>::infinity();
  double min_ric_full = std::numeric_limits<double>::infinity();
  double K = 0;
  bool yang_mills = false;
  bool psi_available = false;
  bool psi_h_zero = false;
  double psi_norm = 0;
  std::size_t grid_points = 0;
  double tolerance = 1e-12;
  bool canonical_defined = true;

  bool condition_A() const { return ii_residual <= tolerance; }
  bool condition_B() const { return canonical_defined && deltaC_residual <= tolerance; }
  bool condition_C() const { return canonical_defined && std::isfinite(min_ric_h); }
};

/// Accumulates one base point into the report.
template <class S>
void accumulate_conditions(ConditionReport& rep, const FramePoint<S>& fp) {
  rep.grid_points++;
  rep.ii_residual = std::max(rep.ii_residual, max_abs(ii_tensor(fp)));
  auto [r, rb] = curvature_cocurvature(fp);
  rep.cocurvature_norm = std::max(rep.cocurvature_norm, max_abs(rb));
  if (rep.ii_residual > rep.tolerance) {
    rep.canonical_defined = false;
    return;
  }
  auto conn = canonical_connection(fp, rep.tolerance);
  auto cf = c_form(fp);
  for (const auto& x : cf) rep.c_residual = std::max(rep.c_residual, std::abs(to_double(x.value())));
  for (const auto& x : codifferential(fp, conn, cf))
    rep.deltaC_residual = std::max(rep.deltaC_residual, std::abs(to_double(x)));
  auto ric = ricci(fp, conn);
  auto [rs, ra] = ricci_split(ric);
  rep.ric_a_norm = std::max(rep.ric_a_norm, max_abs(ra));
  rep.min_ric_h = std::min(rep.min_ric_h, min_sym_eigenvalue(ric, fp.nh));
  rep.min_ric_full = std::min(rep.min_ric_full, min_sym_eigenvalue(ric, fp.n));
  rep.K = std::max(0.0, -rep.min_ric_h);
  rep.yang_mills = rep.ric_a_norm <= rep.tolerance;
}

template <class S>
ConditionReport conditions_report(const std::vector<FramePoint<S>>& grid, double tol = 1e-12) {
  ConditionReport rep;
  rep.tolerance = tol;
  for (const auto& fp : grid) accumulate_conditions(rep, fp);
  if (grid.size() == 1 && grid[0].c(0, 0, 0).is_constant()) {
    auto psi = psi_map(grid[0]);
    rep.psi_available = true;
    rep.psi_norm = max_abs(psi);
    rep.psi_h_zero = psi_vanishes_on_h(psi, grid[0].nh, tol);
  }
  return rep;
}

/// Parts of Ric_g(v,v) = Ric(nabla)(flat v)(v) + 1/2 sum_i |R(A_i,v)|^2 + Ric_F(pr_V v, pr_V v).
struct RicgDecomposition {
  double ric_g;
  double ric_nabla;
  double curvature_term;
  double leaf_ricci;
  double oneill_term;  // 1/4 sum_ij <R(A_i,A_j), v>^2
  double residual() const { return ric_g - ric_nabla - curvature_term - leaf_ricci; }
};

template <class S>
RicgDecomposition ricg_decomposition(const FramePoint<S>& fp, const std::vector<double>& v) {
  auto [r, rb] = curvature_cocurvature(fp);
  if (max_abs(rb) > 1e-12) throw PreconditionViolated("Ric_g decomposition needs an integrable vertical bundle");
  std::size_t n = fp.n, nh = fp.nh;
  auto quad = [&](const Matrix<S>& m) {
    double acc = 0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t l = 0; l < n; ++l) acc += v[b] * to_double(m(b, l)) * v[l];
    return acc;
  };
  RicgDecomposition d{};
  d.ric_g = quad(riemannian_ricci(fp));
  d.ric_nabla = quad(ricci(fp, canonical_connection(fp)));
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t k = nh; k < n; ++k) {
      double comp = 0;
      for (std::size_t j = 0; j < nh; ++j) comp += to_double(r(i, j, k).value()) * v[j];
      d.curvature_term += 0.5 * comp * comp;
    }
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = 0; j < nh; ++j) {
      double comp = 0;
      for (std::size_t k = nh; k < n; ++k) comp += to_double(r(i, j, k).value()) * v[k];
      d.oneill_term += 0.25 * comp * comp;
    }
  // leaves are integral manifolds of V with the induced constant-structure frame
  std::size_t nv = n - nh;
  if (nv > 1) {
    FramePoint<S> leaf;
    leaf.n = nv;
    leaf.nh = nv;
    leaf.c = JetTensor<S>(nv);
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = 0; j < nv; ++j)
        for (std::size_t k = 0; k < nv; ++k) leaf.c(i, j, k) = Jet<S>(fp.c(nh + i, nh + j, nh + k).value());
    auto ricf = riemannian_ricci(leaf);
    for (std::size_t a = 0; a < nv; ++a)
      for (std::size_t b = 0; b < nv; ++b) d.leaf_ricci += v[nh + a] * to_double(ricf(a, b)) * v[nh + b];
  }
  return d;
}

struct CounterexampleRow {
  double c;
  double computed[5];
  double printed[5];
  double off_diagonal;  // largest off-diagonal entry of Ric on the horizontal block
  double max_deviation() const {
    double m = 0;
    for (int i = 0; i < 5; ++i) m = std::max(m, std::abs(computed[i] - printed[i]));
    return m;
  }
};

/// Ric(nabla) on flat Z1, Z2, Z3, d/dc and Ric_g(A2^a, A2^a) from the frame
/// structure functions, next to the closed forms.
inline CounterexampleRow counterexample_table(double c, const Profile& profile) {
  WarpedSu2Frame frame(profile);
  auto fp = frame.at(c);
  auto conn = canonical_connection(fp);
  auto ric = ricci(fp, conn);
  auto ricg = riemannian_ricci(fp);
  CounterexampleRow row{};
  row.c = c;
  for (int i = 0; i < 4; ++i) row.computed[i] = ric(i, i);
  row.computed[4] = ricg(5, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < fp.n; ++j)
      if (i != j) row.off_diagonal = std::max(row.off_diagonal, std::abs(ric(i, j)));
  double f = profile.f(c), df = profile.df(c), ddf = profile.ddf(c);
  double e2 = std::exp(2 * f);
  row.printed[0] = ddf - e2 * (e2 - 1) - 3 * df * df;
  row.printed[1] = ddf - 2 * e2 * (e2 - 1) - 3 * df * df;
  row.printed[2] = row.printed[0];
  row.printed[3] = 2 * (ddf - df * df);
  row.printed[4] = 2 - std::exp(-f);
  return row;
}

}  // namespace subriem
