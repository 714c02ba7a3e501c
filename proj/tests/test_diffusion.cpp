#include "subriem/diffusion.hpp"
#include "subriem/expr.hpp"
#include "subriem/parallel.hpp"
#include "subriem/rng.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <memory>
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
std::shared_ptr<const GroupModel> engel() {
  return model_of(SubRiemannianStructure<Q>::carnot(builtin::engel<Q>(), builtin::engel_strat()));
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

void expect_within(const EstimateWithError& e, double expected, double sigmas = 4) {
  EXPECT_NEAR(e.value, expected, sigmas * e.stderr_ + 1e-12) << "stderr " << e.stderr_;
}

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  PhiloxStream a({42, 7}), b({42, 7}), c({42, 8}), d({43, 7});
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 16; ++i) {
    double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differ_c |= x != c.normal();
    differ_d |= x != d.normal();
  }
  EXPECT_TRUE(differ_c);
  EXPECT_TRUE(differ_d);
}

TEST(Philox, NormalMoments) {
  PhiloxStream s({2024, 0});
  const int n = 200000;
  std::vector<double> x(n), x2(n), x4(n);
  for (int i = 0; i < n; ++i) {
    x[i] = s.normal();
    x2[i] = x[i] * x[i];
    x4[i] = x2[i] * x2[i];
  }
  auto m1 = mean_stderr(x), m2 = mean_stderr(x2), m4 = mean_stderr(x4);
  EXPECT_NEAR(m1.mean, 0.0, 4 * m1.stderr_);
  EXPECT_NEAR(m2.mean, 1.0, 4 * m2.stderr_);
  EXPECT_NEAR(m4.mean, 3.0, 4 * m4.stderr_);
  EXPECT_EQ(PhiloxStream::to_unit(0, 0), 0.0);
  EXPECT_LT(PhiloxStream::to_unit(0xffffffff, 0xffffffff), 1.0);
}

TEST(Parallel, EveryIndexVisitedOnce) {
  std::vector<std::atomic<int>> hits(10007);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, MeanAndStandardError) {
  auto m = mean_stderr({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.stderr_, std::sqrt(5.0 / 3.0) / 2.0);
  EXPECT_EQ(m.n, 4u);
}

TEST(Diffusion, StepCountValidation) {
  EXPECT_EQ(detail::step_count(0.5, 1.0 / 256), 128u);
  EXPECT_EQ(detail::step_count(0.0, 0.1), 0u);
  EXPECT_THROW(detail::step_count(0.3, 0.25), std::invalid_argument);
  EXPECT_THROW(detail::step_count(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(detail::step_count(-1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(simulate_paths(heisenberg(), 1.0, 0.5, 0, 1), std::invalid_argument);
}

TEST(Diffusion, ZeroTimeStaysAtIdentity) {
  auto b = simulate_paths(heisenberg(), 0.0, 0.1, 100, 1);
  for (double e : b.endpoints) EXPECT_EQ(e, 0.0);
}

TEST(Diffusion, AbelianSecondMoment) {
  auto b = simulate_paths(abelian(3), 0.7, 0.1, 100000, 5, endpoints_only());
  std::vector<double> r2(b.n_paths);
  for (std::size_t p = 0; p < b.n_paths; ++p) r2[p] = b.endpoint(p).squaredNorm();
  auto m = mean_stderr(r2);
  EXPECT_NEAR(m.mean, 3 * 0.7, 4 * m.stderr_);
}

TEST(Diffusion, HeisenbergHorizontalAndVerticalMoments) {
  // z = (1/2) sum_{k<l} (dX_k dY_l - dY_k dX_l), so E z^2 = (t^2 - t h) / 4 for the discrete chain
  double t = 1.0, h = 0.25;
  auto b = simulate_paths(heisenberg(), t, h, 200000, 6, endpoints_only());
  std::vector<double> r2(b.n_paths), z2(b.n_paths);
  for (std::size_t p = 0; p < b.n_paths; ++p) {
    auto y = b.endpoint(p);
    r2[p] = y(0) * y(0) + y(1) * y(1);
    z2[p] = y(2) * y(2);
  }
  auto mr = mean_stderr(r2), mz = mean_stderr(z2);
  EXPECT_NEAR(mr.mean, 2 * t, 4 * mr.stderr_);
  EXPECT_NEAR(mz.mean, (t * t - t * h) / 4, 4 * mz.stderr_);
  EXPECT_GT(std::abs(mz.mean - t * t / 4), 4 * mz.stderr_);
}

TEST(Diffusion, MassIsConservedExactly) {
  auto b = simulate_paths(heisenberg(), 0.5, 1.0 / 64, 5000, 7, endpoints_only());
  auto e = estimate_Ptf(Expr("1", b.model->names), b, {0.1, 0.2, 0.3});
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(Diffusion, AntiDevelopmentIsTheHorizontalProjection) {
  for (auto m : {heisenberg(), engel()}) {
    auto b = simulate_paths(m, 0.5, 1.0 / 32, 2000, 8, endpoints_only());
    EXPECT_LT(anti_development_residual(b), 1e-12);
  }
}

TEST(Diffusion, PathsDependOnlyOnSeedAndIndex) {
  auto big = simulate_paths(heisenberg(), 0.5, 1.0 / 32, 1000, 9);
  auto small = simulate_paths(heisenberg(), 0.5, 1.0 / 32, 200, 9);
  for (std::size_t i = 0; i < small.endpoints.size(); ++i) ASSERT_EQ(small.endpoints[i], big.endpoints[i]);
  for (std::size_t i = 0; i < small.adjoint.size(); ++i) ASSERT_EQ(small.adjoint[i], big.adjoint[i]);
  DiffusionOptions serial, threaded;
  serial.threads = 1;
  threaded.threads = 4;
  auto s = simulate_paths(heisenberg(), 0.5, 1.0 / 32, 3000, 10, serial);
  auto t = simulate_paths(heisenberg(), 0.5, 1.0 / 32, 3000, 10, threaded);
  EXPECT_EQ(s.endpoints, t.endpoints);
  EXPECT_EQ(s.poly, t.poly);
  EXPECT_EQ(s.adjoint, t.adjoint);
}

TEST(Diffusion, DilationMapsEqualStepBatches) {
  // same step count, so delta_{1/sqrt t} X_t and X_1 use identical scaled increments
  double t = 0.5;
  auto a = simulate_paths(heisenberg(), t, t / 64, 500, 11, endpoints_only());
  auto b = simulate_paths(heisenberg(), 1.0, 1.0 / 64, 500, 11, endpoints_only());
  for (std::size_t p = 0; p < 500; ++p) {
    auto y = a.endpoint(p);
    y(0) /= std::sqrt(t);
    y(1) /= std::sqrt(t);
    y(2) /= t;
    EXPECT_LT((y - b.endpoint(p)).norm(), 1e-12 * (1 + y.norm()));
  }
}

TEST(Gradient, LinearFunctionIsExact) {
  auto b = simulate_paths(heisenberg(), 0.5, 1.0 / 32, 2000, 12);
  Expr f("X", b.model->names);
  std::vector<double> x{0.2, -0.1, 0.4}, v{1, 0, 0};
  EXPECT_NEAR(gradient_pathwise(f, b, x, v).value, 1.0, 1e-12);
  EXPECT_NEAR(gradient_rep_carnot(f, b, x, v).value, 1.0, 1e-12);
  EXPECT_NEAR(gradient_rep_polygrowth(f, b, x, v).value, 1.0, 1e-12);
}

TEST(Gradient, HeisenbergClosedForms) {
  // horizontal coordinates of x X_t are x + W_t: P_t sin(x) = sin(x0) e^{-t/2}, P_t cos(x-y) = cos(x0-y0) e^{-t}
  double t = 0.5;
  auto b = simulate_paths(heisenberg(), t, 1.0 / 128, 40000, 13);
  std::vector<double> x{0.3, -0.2, 0.5}, vx{1, 0, 0}, vy{0, 1, 0};
  Expr s("sin(x)", b.model->names), c("cos(x-y)", b.model->names);
  expect_within(estimate_Ptf(s, b, x), std::sin(0.3) * std::exp(-t / 2));
  expect_within(estimate_Ptf(c, b, x), std::cos(0.5) * std::exp(-t));
  double ds = std::cos(0.3) * std::exp(-t / 2), dcx = -std::sin(0.5) * std::exp(-t), dcy = std::sin(0.5) * std::exp(-t);
  expect_within(gradient_rep_carnot(s, b, x, vx), ds);
  expect_within(gradient_rep_polygrowth(s, b, x, vx), ds);
  expect_within(gradient_rep_adjoint(s, b, x, vx), ds);
  expect_within(finite_difference_gradient(s, b, x, vx), ds);
  expect_within(gradient_rep_carnot(c, b, x, vx), dcx);
  expect_within(gradient_rep_adjoint(c, b, x, vx), dcx);
  expect_within(gradient_rep_adjoint(c, b, x, vy), dcy);
  expect_within(finite_difference_gradient(c, b, x, vy), dcy);
}

TEST(Gradient, PolygrowthIsPathwiseOnStepTwo) {
  auto m = model_of(SubRiemannianStructure<Q>::carnot(builtin::free_step2_rank3<Q>(),
                                                       Stratification{{{0, 1, 2}, {3, 4, 5}}}));
  auto b = simulate_paths(m, 0.5, 1.0 / 32, 2000, 19);
  Expr f("sin(x1)*cos(x4) + atan(x6)*x2", m->names);
  std::vector<double> x{0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
  for (std::size_t a = 0; a < 6; ++a) {
    std::vector<double> v(6, 0.0);
    v[a] = 1;
    EXPECT_NEAR(gradient_rep_polygrowth(f, b, x, v).value, gradient_pathwise(f, b, x, v).value, 1e-12);
  }
}

TEST(Gradient, EngelPolygrowthIsExactForSeparableFunctions) {
  // the stochastic correction pairs with second derivatives along [h, g_2]; these functions do not see it
  auto m = engel();
  EXPECT_FALSE(m->psi_h_zero);
  EXPECT_FALSE(m->adjoint_available);
  auto b = simulate_paths(m, 0.5, 1.0 / 64, 20000, 14);
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  for (std::string text : {"x4", "x3", "x1*x3", "sin(x2)", "x4 + x1^2"}) {
    Expr f(text, m->names);
    for (std::vector<double> v : {std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 1, 0, 0}}) {
      auto p = gradient_rep_polygrowth(f, b, x, v);
      auto fd = finite_difference_gradient(f, b, x, v);
      EXPECT_NEAR(p.value, fd.value, 3 * std::hypot(p.stderr_, fd.stderr_)) << text;
    }
    EXPECT_THROW(gradient_rep_carnot(f, b, x, {1, 0, 0, 0}), RepresentationInapplicable);
    EXPECT_THROW(gradient_rep_adjoint(f, b, x, {1, 0, 0, 0}), RepresentationInapplicable);
  }
}

TEST(Gradient, EngelPolygrowthAgreesWithFiniteDifferenceOnBoundedFunctions) {
  auto m = engel();
  auto b = simulate_paths(m, 0.5, 1.0 / 64, 20000, 14);
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  for (std::string text : {"sin(x1)*x4", "cos(x3+x2)", "atan(x4)"}) {
    Expr f(text, m->names);
    for (std::vector<double> v : {std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 1, 0, 0}}) {
      auto p = gradient_rep_polygrowth(f, b, x, v);
      auto fd = finite_difference_gradient(f, b, x, v);
      EXPECT_NEAR(p.value, fd.value, 3 * std::hypot(p.stderr_, fd.stderr_)) << text << " v=" << v[0] << v[1];
    }
  }
}

TEST(Gradient, FlatGroupAdjointIsPathwise) {
  auto b = simulate_paths(abelian(2), 0.5, 1.0 / 16, 3000, 15);
  Expr f("sin(x)*cos(y)", b.model->names);
  std::vector<double> x{0.4, 0.1}, v{0.6, 0.8};
  EXPECT_NEAR(gradient_rep_adjoint(f, b, x, v).value, gradient_pathwise(f, b, x, v).value, 1e-12);
  EXPECT_NEAR(gradient_rep_carnot(f, b, x, v).value, gradient_pathwise(f, b, x, v).value, 1e-12);
}

TEST(Gradient, MissingStateIsReported) {
  auto b = simulate_paths(heisenberg(), 0.5, 1.0 / 16, 100, 16, endpoints_only());
  Expr f("sin(x)", b.model->names);
  EXPECT_THROW(gradient_rep_polygrowth(f, b, {0, 0, 0}, {1, 0, 0}), RepresentationInapplicable);
  EXPECT_THROW(gradient_rep_adjoint(f, b, {0, 0, 0}, {1, 0, 0}), RepresentationInapplicable);
  EXPECT_THROW(finite_difference_gradient(f, b, {0, 0, 0}, {1, 0, 0}, 0.0), std::invalid_argument);
}

TEST(Bounds, GradientAndVarianceChecksOnClosedForms) {
  double t = 0.5;
  auto b = simulate_paths(heisenberg(), t, 1.0 / 64, 20000, 17, endpoints_only());
  Expr s("sin(x)", b.model->names);
  auto g = gradient_bound_check(s, b, {0, 0, 0}, 2.0, 1.0);
  EXPECT_NEAR(g.lhs, std::exp(-t / 2), 4 * g.lhs_stderr);
  // (P_t cos^2)^{1/2} = ((1 + e^{-2t}) / 2)^{1/2} at 0
  EXPECT_NEAR(g.rhs, std::sqrt((1 + std::exp(-2 * t)) / 2), 4 * g.rhs_stderr);
  auto v = variance_bound_check(s, b, {0, 0, 0}, 1.0);
  // Var sin(W) = (1 - e^{-2t}) / 2 for W ~ N(0, t)
  EXPECT_NEAR(v.lhs, (1 - std::exp(-2 * t)) / 2, 4 * v.lhs_stderr);
  EXPECT_TRUE(v.pass);
  auto sup = gradient_bound_check(s, b, {0, 0, 0}, std::numeric_limits<double>::infinity(), 1.0);
  EXPECT_LE(sup.rhs, 1.0);
  EXPECT_GT(sup.rhs, 0.99);
}

TEST(Bounds, SupNormCheck) {
  auto b = simulate_paths(heisenberg(), 0.5, 1.0 / 64, 5000, 18, endpoints_only());
  Expr f("cos(x-y)", b.model->names);
  auto r = sup_norm_check(f, b, {{0, 0, 0}, {0.5, -0.5, 0.2}, {1, 0, -1}}, 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.df_sup, std::sqrt(2.0) + 1e-12);
  EXPECT_DOUBLE_EQ(r.bound, std::exp(0.5) * r.df_sup);
}
