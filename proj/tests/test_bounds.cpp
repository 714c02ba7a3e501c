#include "subriem/bounds.hpp"
#include "subriem/expr.hpp"
#include "subriem/heat_kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

using namespace subriem;
using Q = Rational;

namespace {

std::shared_ptr<const GroupModel> model_of(const SubRiemannianStructure<Q>& srs) {
  return std::make_shared<const GroupModel>(GroupModel::from_structure(srs));
}
std::shared_ptr<const GroupModel> heisenberg() {
  return model_of(SubRiemannianStructure<Q>::carnot(builtin::heisenberg<Q>(), builtin::heisenberg_strat()));
}
std::shared_ptr<const GroupModel> abelian(std::size_t n) {
  return model_of(SubRiemannianStructure<Q>::carnot(builtin::abelian<Q>(n), builtin::abelian_strat(n)));
}

DiffusionOptions endpoints_only() {
  DiffusionOptions o;
  o.polygrowth = false;
  o.adjoint = false;
  return o;
}

SmallVec point(double x, double y, double z) {
  SmallVec p(3);
  p << x, y, z;
  return p;
}

}  // namespace

TEST(Constants, ClosedForms) {
  EXPECT_NEAR(c_nq(2, 4), std::pow(16 * std::sqrt(std::numbers::pi), 0.25), 1e-13);
  EXPECT_NEAR(gaussian_moment(2, 2), 2, 1e-14);
  EXPECT_NEAR(gaussian_moment(1, 2), 1, 1e-14);
  EXPECT_NEAR(gaussian_moment(3, 2), 3, 1e-14);
  // |W|^2 is chi-square with two degrees of freedom: E = 2, Var = 4
  EXPECT_NEAR(gaussian_moment(2, 4), 8, 1e-13);
  EXPECT_NEAR(printed_moment(2, 2), 4 * std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_DOUBLE_EQ(conjugate(2), 2);
  EXPECT_DOUBLE_EQ(conjugate(3), 1.5);
  EXPECT_DOUBLE_EQ(conjugate(std::numeric_limits<double>::infinity()), 1);
  EXPECT_THROW(c_nq(2, 1.5), std::invalid_argument);
}

TEST(Constants, GaussianMomentMatchesRadialQuadrature) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (double n : {1.0, 2.0, 3.0, 5.0})
    for (double q : {1.0, 2.0, 3.5, 4.0}) {
      // chi density r^{n-1} e^{-r^2/2} / (2^{n/2-1} Gamma(n/2))
      auto g = [&](double r) {
        return std::pow(r, q + n - 1) * std::exp(-r * r / 2) / (std::pow(2.0, n / 2 - 1) * std::tgamma(n / 2));
      };
      EXPECT_NEAR(gaussian_moment(n, q), GK::integrate(g, 0.0, 40.0, 10, 1e-13), 1e-9) << n << " " << q;
    }
}

TEST(Constants, TopShare) {
  EXPECT_NEAR(top_share(std::vector<double>(100, 1.0)), 0.01, 1e-15);
  std::vector<double> v(100, 1.0);
  v[17] = 99;
  EXPECT_NEAR(top_share(v), 0.5, 1e-15);
  EXPECT_EQ(top_share({}), 0);
}

TEST(HeisenbergKernel, ValueAtOrigin) {
  HeisenbergHeatKernel k;
  EXPECT_NEAR(k.eval(point(0, 0, 0)).rho, 0.25, 1e-12);
}

TEST(HeisenbergKernel, CentralAxisIsSechSquared) {
  // int_R cos(2 mu z) mu / sinh(mu) dmu = (pi^2 / 2) sech^2(pi z)
  HeisenbergHeatKernel k;
  for (double z : {0.1, 0.3, 0.7, 1.5, 3.0}) {
    double s = 1 / std::cosh(std::numbers::pi * z);
    EXPECT_NEAR(k.eval(point(0, 0, z)).rho, s * s / 4, 1e-12) << z;
  }
}

TEST(HeisenbergKernel, ZMarginalIsPlanarGaussian) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (double r : {0.0, 0.5, 1.3, 2.5}) {
    auto g = [&](double z) { return HeisenbergHeatKernel::integrals(r * r, z)[0]; };
    double m = 2 * GK::integrate(g, 0.0, 12.0, 8, 1e-11);
    EXPECT_NEAR(m, std::exp(-r * r / 2) / (2 * std::numbers::pi), 1e-8) << r;
  }
}

TEST(HeisenbergKernel, TotalMass) { EXPECT_NEAR(heisenberg_mass(), 1.0, 1e-6); }

TEST(HeisenbergKernel, GradientMatchesFiniteDifferences) {
  HeisenbergHeatKernel k;
  double h = 1e-5;
  for (auto p : {point(0.3, -0.4, 0.2), point(1.1, 0.2, -0.6), point(-0.5, 0.9, 1.4)}) {
    auto kv = k.eval(p);
    for (int i = 0; i < 3; ++i) {
      SmallVec a = p, b = p;
      a(i) += h;
      b(i) -= h;
      EXPECT_NEAR(kv.grad(i), (k.eval(a).rho - k.eval(b).rho) / (2 * h), 1e-9);
    }
  }
}

TEST(HeisenbergKernel, KernelDensityEstimateIsClose) {
  auto b = simulate_paths(heisenberg(), 1.0, 1.0 / 64, 40000, 5, endpoints_only());
  KdeHeatKernel kde(b);
  HeisenbergHeatKernel exact;
  EXPECT_EQ(kde.provenance(), "kernel-density-estimate");
  for (auto p : {point(0, 0, 0), point(0.5, 0, 0), point(0, 0, 0.3), point(0.5, -0.5, 0.2), point(1, 0.3, -0.2)}) {
    double e = exact.eval(p).rho;
    EXPECT_NEAR(kde.eval(p).rho, e, 0.15 * e);
  }
}

TEST(Gaussian, AbelianPlaneConstants) {
  // theta = 2 + r^2: C_2^2 = 4 + 4 E r^2 + E r^4 = 20, Cov(r^2, -r^2/2) = -2, so the bound is 2 + sqrt 8
  auto m = abelian(2);
  GaussianHeatKernel g(2);
  EXPECT_DOUBLE_EQ(theta(*m, g, SmallVec::Zero(2)), 2);
  auto b = simulate_paths(m, 1.0, 1.0 / 4, 100000, 3, endpoints_only());
  auto ks = kernel_samples(b, g);
  auto c2 = estimate_Cp(ks, 2);
  EXPECT_NEAR(c2.value, std::sqrt(20.0), 4 * c2.stderr_);
  EXPECT_TRUE(c2.certified);
  EXPECT_GE(c2.min_theta, 2);
  auto ub = c2_upper_bound(ks, 2, 2);
  EXPECT_NEAR(ub.cov, -2, 4 * ub.cov_stderr);
  EXPECT_NEAR(ub.value, 2 + 2 * std::sqrt(2.0), 4 * ub.stderr_);
  EXPECT_NEAR(ub.pi2_mean, 2, 4 * ub.pi2_stderr);
  auto md = moment_diagnostics(ks, 2, 2, 2);
  EXPECT_NEAR(md.fisher, 2, 4 * md.fisher_stderr);
  EXPECT_NEAR(md.mc, 2, 4 * md.mc_stderr);
}

TEST(Heisenberg, ConstantsAndFisherInformation) {
  auto m = heisenberg();
  HeisenbergHeatKernel k;
  EXPECT_DOUBLE_EQ(theta(*m, k, point(0, 0, 0)), 2);
  auto b = simulate_paths(m, 1.0, 1.0 / 64, 20000, 9, endpoints_only());
  auto ks = kernel_samples(b, k);
  auto c2 = estimate_Cp(ks, 2);
  auto ub = c2_upper_bound(ks, 2, 4);
  EXPECT_GE(c2.min_theta, 2 - 1e-9);
  EXPECT_GE(c2.value, 2);
  EXPECT_LE(c2.value, ub.value + 3 * std::hypot(c2.stderr_, ub.stderr_));
  // entropy grows like (Q/2) log t, so the Fisher information at time one is Q
  auto md = moment_diagnostics(ks, 2, 2, 4);
  EXPECT_NEAR(md.fisher, 4, 4 * md.fisher_stderr);
  EXPECT_NEAR(md.mc, 2, 4 * md.mc_stderr);
  EXPECT_NEAR(md.printed / md.gaussian, 2 * std::sqrt(std::numbers::pi), 1e-12);
}

TEST(Heisenberg, C2IsDilationInvariant) {
  auto m = heisenberg();
  HeisenbergHeatKernel k;
  std::vector<double> vals;
  for (double t : {0.5, 1.0, 2.0}) {
    auto b = simulate_paths(m, t, t / 64, 4000, 13, endpoints_only());
    vals.push_back(estimate_Cp(kernel_samples(b, k), 2).value);
  }
  EXPECT_NEAR(vals[0], vals[1], 1e-9);
  EXPECT_NEAR(vals[2], vals[1], 1e-9);
}

TEST(Checks, HeisenbergGradientAndVarianceBounds) {
  auto m = heisenberg();
  HeisenbergHeatKernel k;
  auto x1 = simulate_paths(m, 1.0, 1.0 / 64, 20000, 21, endpoints_only());
  double c2 = estimate_Cp(kernel_samples(x1, k), 2).value;
  auto b = simulate_paths(m, 0.5, 1.0 / 128, 20000, 22, endpoints_only());
  std::vector<double> x{0.2, -0.1, 0.3};
  for (const auto& name : test_function_suite()) {
    Expr f(name, m->names);
    EXPECT_TRUE(gradient_bound_check(f, b, x, 2, c2).pass) << name;
    EXPECT_TRUE(variance_bound_check(f, b, x, c2).pass) << name;
    EXPECT_TRUE(part_b_bound_check(f, b, x, 4, 4).pass) << name;
    EXPECT_TRUE(part_b_bound_check(f, b, x, std::numeric_limits<double>::infinity(), 4).pass) << name;
  }
  Expr f("sin(x)", m->names);
  EXPECT_THROW(part_b_bound_check(f, b, x, 2, 4), std::invalid_argument);
  EXPECT_THROW(estimate_Cp(kernel_samples(x1, k), 1), std::invalid_argument);
}

TEST(Checks, VarianceBoundIsAnEqualityForLinearFunctionsOnTheLine) {
  // Var(x + W_t) = t and |grad f| = 1, so the check is tight at C_2 = 1
  auto m = abelian(1);
  auto b = simulate_paths(m, 0.7, 0.7 / 8, 50000, 4, endpoints_only());
  Expr f("x", m->names);
  auto r = variance_bound_check(f, b, {0.4}, 1.0);
  EXPECT_NEAR(r.lhs, 0.7, 4 * r.lhs_stderr);
  EXPECT_NEAR(r.rhs * r.constant, 0.7, 1e-12);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(variance_bound_check(f, b, {0.4}, 0.9).pass);
}
