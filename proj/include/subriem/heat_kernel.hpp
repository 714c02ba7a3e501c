#pragma once

#include "subriem/diffusion.hpp"
#include "subriem/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace subriem {

/// Heat kernel value with its gradient in exponential coordinates.
struct KernelValue {
  double rho = 0;
  SmallVec grad;
};

/// rho(y) = p_1(1, y) for the sub-Laplacian semigroup of the model.
class HeatKernelProvider {
 public:
  virtual ~HeatKernelProvider() = default;
  virtual KernelValue eval(const SmallVec& y) const = 0;
  virtual std::string provenance() const = 0;
};

/// Heisenberg group with [X,Y] = Z and generator (X^2 + Y^2)/2:
/// rho = 1/(2 pi^2) int_R cos(2 mu z) (mu / sinh mu) exp(-(r^2/2) mu coth mu) dmu.
class HeisenbergHeatKernel : public HeatKernelProvider {
 public:
  std::string provenance() const override { return "closed-form"; }

  KernelValue eval(const SmallVec& y) const override {
    double x = y(0), yy = y(1), z = y(2);
    double r2 = x * x + yy * yy;
    auto [v, dr2, dz] = integrals(r2, z);
    KernelValue out;
    out.rho = v;
    out.grad = SmallVec(3);
    out.grad << 2 * x * dr2, 2 * yy * dr2, dz;
    return out;
  }

  /// rho, d rho / d(r^2), d rho / dz
  static std::array<double, 3> integrals(double r2, double z) {
    using Rule = boost::math::quadrature::gauss<double, 10>;
    double decay = 1 + r2 / 2;
    double upper = std::min(45.0, 38.0 / decay + 2.0);
    double width = std::min(1.0, 1.0 / (1.0 + 2.0 * std::abs(z)));
    std::size_t panels = static_cast<std::size_t>(std::ceil(upper / width));
    width = upper / static_cast<double>(panels);
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    double s0 = 0, s1 = 0, s2 = 0;
    auto add = [&](double mu, double w) {
      double ratio = mu / std::sinh(mu);
      double mcoth = mu / std::tanh(mu);
      double base = w * ratio * std::exp(-0.5 * r2 * mcoth);
      double c = std::cos(2 * mu * z), s = std::sin(2 * mu * z);
      s0 += base * c;
      s1 += base * c * (-0.5 * mcoth);
      s2 += base * (-2 * mu * s);
    };
    for (std::size_t p = 0; p < panels; ++p) {
      double mid = (static_cast<double>(p) + 0.5) * width, half = width / 2;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0) {
          add(mid, half * ws[i]);
        } else {
          add(mid + half * xs[i], half * ws[i]);
          add(mid - half * xs[i], half * ws[i]);
        }
      }
    }
    // even integrand: int_R = 2 int_0^inf
    double k = 2.0 / (2 * std::numbers::pi * std::numbers::pi);
    return {k * s0, k * s1, k * s2};
  }
};

/// Standard Gaussian density on R^n (abelian group, generator Delta/2).
class GaussianHeatKernel : public HeatKernelProvider {
 public:
  explicit GaussianHeatKernel(std::size_t n) : n_(n) {}
  std::string provenance() const override { return "closed-form"; }
  KernelValue eval(const SmallVec& y) const override {
    double r2 = y.squaredNorm();
    KernelValue out;
    out.rho = std::pow(2 * std::numbers::pi, -0.5 * static_cast<double>(n_)) * std::exp(-0.5 * r2);
    out.grad = -out.rho * y;
    return out;
  }

 private:
  std::size_t n_;
};

/// Gaussian product-kernel density estimate from endpoint samples, with
/// per-coordinate bandwidth from Scott's rule.
class KdeHeatKernel : public HeatKernelProvider {
 public:
  KdeHeatKernel(const DiffusionBatch& batch, double bandwidth_factor = 1.0) : n_(batch.n()), data_(batch.endpoints) {
    std::size_t m = batch.n_paths;
    bw_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0, ss = 0;
      for (std::size_t p = 0; p < m; ++p) s += data_[p * n_ + i];
      double mean = s / static_cast<double>(m);
      for (std::size_t p = 0; p < m; ++p) ss += (data_[p * n_ + i] - mean) * (data_[p * n_ + i] - mean);
      double sd = std::sqrt(ss / static_cast<double>(m - 1));
      bw_[i] = bandwidth_factor * sd * std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(n_) + 4));
    }
    norm_ = 1.0 / static_cast<double>(m);
    for (double b : bw_) norm_ /= std::sqrt(2 * std::numbers::pi) * b;
  }
  std::string provenance() const override { return "kernel-density-estimate"; }
  const std::vector<double>& bandwidth() const { return bw_; }

  KernelValue eval(const SmallVec& y) const override {
    std::size_t m = data_.size() / n_;
    KernelValue out;
    out.grad = SmallVec::Zero(n_);
    for (std::size_t p = 0; p < m; ++p) {
      double e = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        double d = (y(i) - data_[p * n_ + i]) / bw_[i];
        e += d * d;
      }
      double k = std::exp(-0.5 * e);
      out.rho += k;
      for (std::size_t i = 0; i < n_; ++i) out.grad(i) -= k * (y(i) - data_[p * n_ + i]) / (bw_[i] * bw_[i]);
    }
    out.rho *= norm_;
    out.grad *= norm_;
    return out;
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
  std::vector<double> bw_;
  double norm_ = 1;
};

/// |grad^H log rho|(y) from the coordinate gradient.
inline double horizontal_log_gradient(const GroupModel& m, const KernelValue& kv, const SmallVec& y) {
  SmallVec d = m.basis * (m.left_jacobian(y).transpose() * kv.grad);
  return d.head(m.nh).norm() / kv.rho;
}

/// Integral of rho over a box by tensor Gauss-Legendre quadrature
/// (Heisenberg: exploits radial symmetry in (x, y) and evenness in z).
inline double heisenberg_mass(double r_max = 9.0, double z_max = 8.0, std::size_t panels = 24) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  auto paneled = [&](auto&& g, double hi) {
    double total = 0, w = hi / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) total += Rule::integrate(g, p * w, (p + 1) * w);
    return total;
  };
  auto radial = [&](double r) {
    auto zint = [&](double z) { return HeisenbergHeatKernel::integrals(r * r, z)[0]; };
    return 2 * paneled(zint, z_max) * 2 * std::numbers::pi * r;
  };
  return paneled(radial, r_max);
}

}  // namespace subriem
