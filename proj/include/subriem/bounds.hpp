#pragma once

#include "subriem/diffusion.hpp"
#include "subriem/heat_kernel.hpp"
#include "subriem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace subriem {

/// theta(y) = n + |pi(y)| |grad^H log rho|(y)
inline double theta(const GroupModel& m, const HeatKernelProvider& provider, const SmallVec& y) {
  auto kv = provider.eval(y);
  return static_cast<double>(m.nh) + std::sqrt(horizontal_norm2(m, y)) * horizontal_log_gradient(m, kv, y);
}

/// Per-sample quantities at the rescaled endpoints delta_{1/sqrt t} X_t.
struct KernelSamples {
  std::vector<double> theta;
  std::vector<double> pi2;       // |pi|^2
  std::vector<double> log_rho;
  std::vector<double> fisher;    // |grad^H log rho|^2
  std::vector<double> horizontal_norm;  // |W|, used for the moment diagnostics
  double t = 1;
};

inline SmallVec rescale(const GroupModel& m, const SmallVec& y, double s) {
  if (!m.strat) throw PreconditionViolated("dilations need a stratified algebra");
  auto w = m.strat->weights(m.n);
  SmallVec out = y;
  for (std::size_t i = 0; i < m.n; ++i) out(i) *= std::pow(s, w[i]);
  return out;
}

inline KernelSamples kernel_samples(const DiffusionBatch& b, const HeatKernelProvider& provider) {
  const GroupModel& m = *b.model;
  KernelSamples ks;
  ks.t = b.t;
  std::size_t np = b.n_paths;
  ks.theta.resize(np);
  ks.pi2.resize(np);
  ks.log_rho.resize(np);
  ks.fisher.resize(np);
  ks.horizontal_norm.resize(np);
  double s = 1.0 / std::sqrt(b.t);
  parallel_for(np, [&](std::size_t p) {
    SmallVec y = rescale(m, b.endpoint(p), s);
    auto kv = provider.eval(y);
    double g = horizontal_log_gradient(m, kv, y);
    double r2 = horizontal_norm2(m, y);
    ks.theta[p] = static_cast<double>(m.nh) + std::sqrt(r2) * g;
    ks.pi2[p] = r2;
    ks.log_rho[p] = std::log(kv.rho);
    ks.fisher[p] = g * g;
    double w2 = 0;
    for (std::size_t a = 0; a < m.nh; ++a) w2 += b.w[p * m.nh + a] * b.w[p * m.nh + a];
    ks.horizontal_norm[p] = std::sqrt(w2) * s;
  });
  return ks;
}

/// Share of the sum contributed by the largest 1% of the values.
inline double top_share(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end(), std::greater<>());
  std::size_t k = std::max<std::size_t>(1, v.size() / 100);
  double top = 0, all = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    all += v[i];
    if (i < k) top += v[i];
  }
  return all > 0 ? top / all : 0;
}

struct CpEstimate {
  double p = 2, q = 2;
  double value = 0, stderr_ = 0;
  double moment = 0, moment_stderr = 0;  // E[theta^q]
  double top_share = 0;
  bool certified = true;
  double min_theta = 0;
};

/// Hoelder conjugate of p; p = infinity gives q = 1.
inline double conjugate(double p) { return std::isinf(p) ? 1.0 : p / (p - 1.0); }

/// C_p = E[theta(X_1)^q]^{1/q}. Not certified when the top 1% of samples
/// carries more than half of the moment.
inline CpEstimate estimate_Cp(const KernelSamples& ks, double p) {
  if (!(p > 1)) throw std::invalid_argument("p must exceed 1");
  CpEstimate e;
  e.p = p;
  e.q = conjugate(p);
  std::vector<double> powq(ks.theta.size());
  for (std::size_t i = 0; i < powq.size(); ++i) powq[i] = std::pow(ks.theta[i], e.q);
  auto ms = mean_stderr(powq);
  e.moment = ms.mean;
  e.moment_stderr = ms.stderr_;
  e.value = std::pow(ms.mean, 1.0 / e.q);
  e.stderr_ = std::pow(ms.mean, 1.0 / e.q - 1.0) / e.q * ms.stderr_;
  e.top_share = top_share(powq);
  e.certified = e.top_share <= 0.5;
  e.min_theta = ks.theta.empty() ? 0 : *std::min_element(ks.theta.begin(), ks.theta.end());
  return e;
}

struct C2Bound {
  double n = 0, Q = 0;
  double cov = 0, cov_stderr = 0;
  double radicand = 0;
  double value = 0, stderr_ = 0;
  double pi2_mean = 0, pi2_stderr = 0;  // consistency check: should equal n
  bool consistent = true;
};

/// n + sqrt(nQ - 2 Cov[|pi|^2, log rho]).
inline C2Bound c2_upper_bound(const KernelSamples& ks, std::size_t n, int Q) {
  C2Bound r;
  r.n = static_cast<double>(n);
  r.Q = Q;
  auto a = mean_stderr(ks.pi2), l = mean_stderr(ks.log_rho);
  std::vector<double> prod(ks.pi2.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = (ks.pi2[i] - a.mean) * (ks.log_rho[i] - l.mean);
  auto c = mean_stderr(prod);
  double m = static_cast<double>(prod.size());
  r.cov = m > 1 ? c.mean * m / (m - 1) : 0;
  r.cov_stderr = c.stderr_;
  r.radicand = r.n * Q - 2 * r.cov;
  r.pi2_mean = a.mean;
  r.pi2_stderr = a.stderr_;
  if (r.radicand < 0) {
    r.consistent = r.radicand + 2 * 3 * r.cov_stderr >= 0;
    r.value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double sq = std::sqrt(r.radicand);
  r.value = r.n + sq;
  r.stderr_ = sq > 0 ? r.cov_stderr / sq : 0;
  return r;
}

/// (2^{(q+n+1)/2} pi^{(n-1)/2} / sqrt(n) * Gamma((n+q)/2) / Gamma(n/2))^{1/q}
inline double c_nq(double n, double q) {
  if (q < 2) throw std::invalid_argument("c_nq needs q >= 2");
  double inner = std::pow(2.0, (q + n + 1) / 2) * std::pow(std::numbers::pi, (n - 1) / 2) / std::sqrt(n) *
                 std::tgamma((n + q) / 2) / std::tgamma(n / 2);
  return std::pow(inner, 1.0 / q);
}

/// E|W_1|^q for a standard Gaussian in R^n.
inline double gaussian_moment(double n, double q) {
  return std::pow(2.0, q / 2) * std::tgamma((n + q) / 2) / std::tgamma(n / 2);
}

/// The prefactor printed alongside the moment identity.
inline double printed_moment(double n, double q) {
  return std::pow(2.0, (q + n + 1) / 2) * std::pow(std::numbers::pi, (n - 1) / 2) / std::sqrt(n) *
         std::tgamma((n + q) / 2) / std::tgamma(n / 2);
}

struct MomentDiagnostics {
  double n = 0, q = 0;
  double mc = 0, mc_stderr = 0;
  double gaussian = 0;
  double printed = 0;
  double fisher = 0, fisher_stderr = 0;
  double Q = 0;
};

inline MomentDiagnostics moment_diagnostics(const KernelSamples& ks, std::size_t n, double q, int Q) {
  MomentDiagnostics d;
  d.n = static_cast<double>(n);
  d.q = q;
  d.Q = Q;
  std::vector<double> mq(ks.horizontal_norm.size());
  for (std::size_t i = 0; i < mq.size(); ++i) mq[i] = std::pow(ks.horizontal_norm[i], q);
  auto a = mean_stderr(mq);
  d.mc = a.mean;
  d.mc_stderr = a.stderr_;
  d.gaussian = gaussian_moment(d.n, q);
  d.printed = printed_moment(d.n, q);
  auto f = mean_stderr(ks.fisher);
  d.fisher = f.mean;
  d.fisher_stderr = f.stderr_;
  return d;
}

/// |grad^H P_t f| <= (n + c_{n,q} sqrt(Q)) (P_t |grad^H f|^p)^{1/p}, 1/p + 1/q = 1/2.
template <class F>
BoundCheck part_b_bound_check(const F& f, const DiffusionBatch& b, const std::vector<double>& x, double p, int Q) {
  if (!(p > 2)) throw std::invalid_argument("part (b) needs p > 2");
  double q = std::isinf(p) ? 2.0 : 1.0 / (0.5 - 1.0 / p);
  double constant = static_cast<double>(b.model->nh) + c_nq(static_cast<double>(b.model->nh), q) * std::sqrt(Q);
  return gradient_bound_check(f, b, x, p, constant);
}

}  // namespace subriem
