#include "subriem/expr.hpp"
#include "subriem/lie_algebra.hpp"
#include "subriem/poly.hpp"
#include "subriem/poly_fields.hpp"
#include "subriem/sr_structure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace subriem;
using Q = Rational;
using P = Poly<Q>;

namespace {

P var(std::size_t n, std::size_t i) { return P::variable(n, i); }

// d/dt f(x * (t e_i)) at t = 0 (left) or d/dt f((t e_i) * x) (right), through the
// group law on polynomial coordinates in n + 1 variables, the last one being t.
P invariant_derivative_oracle(const LieAlgebra<Q>& alg, const P& f, std::size_t i, bool left) {
  std::size_t n = alg.dim();
  std::vector<P> x(n), te(n, P::monomial(std::vector<int>(n + 1, 0), Q(0)));
  for (std::size_t k = 0; k < n; ++k) x[k] = var(n + 1, k);
  te[i] = var(n + 1, n);
  auto moved = left ? bch_product(alg, x, te) : bch_product(alg, te, x);
  P composed = f.evaluate(moved);
  P d = composed.derivative(n);
  std::vector<P> at_zero(n + 1);
  for (std::size_t k = 0; k < n; ++k) at_zero[k] = var(n, k);
  at_zero[n] = P::monomial(std::vector<int>(n, 0), Q(0));
  return d.evaluate(at_zero);
}

P random_poly(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(-4, 4), e(0, 2);
  P out = P::monomial(std::vector<int>(n, 0), Q(1));
  for (int t = 0; t < 5; ++t) {
    std::vector<int> ex(n);
    for (auto& x : ex) x = e(rng);
    out += P::monomial(ex, Q(c(rng)));
  }
  return out;
}

}  // namespace

TEST(Poly, ArithmeticAndDerivatives) {
  P x = var(2, 0), y = var(2, 1);
  P sq = (x + y).pow(2);
  EXPECT_EQ(sq, x * x + P(Q(2)) * x * y + y * y);
  EXPECT_EQ(sq.derivative(0), P(Q(2)) * x + P(Q(2)) * y);
  EXPECT_EQ(sq.degree(), 2);
  EXPECT_TRUE((sq - sq).is_zero());
  EXPECT_EQ(sq.evaluate(std::vector<Q>{Q(1), Q(2)}), Q(9));
  EXPECT_DOUBLE_EQ(sq.evaluate(std::vector<double>{0.5, 0.25}), 0.5625);
}

TEST(Poly, ProductRule) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    P f = random_poly(3, rng), g = random_poly(3, rng);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ((f * g).derivative(i), f.derivative(i) * g + f * g.derivative(i));
  }
}

TEST(Poly, ScaleVariables) {
  P x = var(2, 0), y = var(2, 1);
  P f = x * x * y + y;
  P g = f.scale_variables({Q(2), Q(3)});
  EXPECT_EQ(g, P(Q(12)) * x * x * y + P(Q(3)) * y);
}

class InvariantFields : public ::testing::TestWithParam<int> {
 protected:
  LieAlgebra<Q> algebra() const {
    switch (GetParam()) {
      case 0: return builtin::heisenberg<Q>();
      case 1: return builtin::engel<Q>();
      case 2: return builtin::free_step2_rank3<Q>();
      default: return builtin::strict_upper_triangular<Q>(4);
    }
  }
};

TEST_P(InvariantFields, LeftFieldsDifferentiateAlongRightTranslation) {
  auto alg = algebra();
  auto fields = left_invariant_fields(alg);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 3; ++t) {
    P f = random_poly(alg.dim(), rng);
    for (std::size_t i = 0; i < alg.dim(); ++i)
      EXPECT_EQ(apply_field(fields[i], f), invariant_derivative_oracle(alg, f, i, true)) << "field " << i;
  }
}

TEST_P(InvariantFields, RightFieldsDifferentiateAlongLeftTranslation) {
  auto alg = algebra();
  auto fields = right_invariant_fields(alg);
  std::mt19937_64 rng(12);
  P f = random_poly(alg.dim(), rng);
  for (std::size_t i = 0; i < alg.dim(); ++i)
    EXPECT_EQ(apply_field(fields[i], f), invariant_derivative_oracle(alg, f, i, false)) << "field " << i;
}

TEST_P(InvariantFields, LeftFieldBracketsFollowStructureConstants) {
  auto alg = algebra();
  auto fields = left_invariant_fields(alg);
  std::size_t n = alg.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto br = field_bracket(fields[i], fields[j]);
      for (std::size_t a = 0; a < n; ++a) {
        P expected = P::monomial(std::vector<int>(n, 0), Q(0));
        for (std::size_t k = 0; k < n; ++k)
          if (!is_zero(alg.c(i, j, k))) expected += P(alg.c(i, j, k)) * fields[k][a];
        EXPECT_EQ(br[a], expected);
      }
    }
}

TEST_P(InvariantFields, LeftAndRightFieldsCommute) {
  auto alg = algebra();
  auto l = left_invariant_fields(alg), r = right_invariant_fields(alg);
  for (std::size_t i = 0; i < alg.dim(); ++i)
    for (std::size_t j = 0; j < alg.dim(); ++j) EXPECT_TRUE(is_zero_form(field_bracket(l[i], r[j])));
}

INSTANTIATE_TEST_SUITE_P(Algebras, InvariantFields, ::testing::Values(0, 1, 2, 3));

TEST(SubLaplacian, HeisenbergClosedForms) {
  auto srs = SubRiemannianStructure<Q>::carnot(builtin::heisenberg<Q>(), builtin::heisenberg_strat());
  P x = var(3, 0), y = var(3, 1), z = var(3, 2);
  EXPECT_EQ(sub_laplacian_poly(srs, x * x + y * y), P(Q(4)));
  EXPECT_EQ(sub_laplacian_poly(srs, z * z), P(Q(1, 2)) * (x * x + y * y));
  EXPECT_TRUE(sub_laplacian_poly(srs, z).is_zero());
}

TEST(Expr, ValuesAndGradientsMatchFiniteDifferences) {
  std::vector<std::string> names{"X", "Y", "Z"};
  for (std::string text : {"sin(x)", "cos(x-y)", "atan(z)", "sin(x)+atan(z)", "cos(z)*sin(y)",
                           "exp(X*Y)/(1+Z^2)", "x1^3 - 2.5*x2*x3", "-(x+y)^2"}) {
    Expr f(text, names);
    std::vector<double> p{0.3, -0.7, 1.1};
    auto d = f.eval(p);
    EXPECT_DOUBLE_EQ(d.v, f.value(p));
    for (std::size_t i = 0; i < 3; ++i) {
      double h = 1e-6;
      auto a = p, b = p;
      a[i] += h;
      b[i] -= h;
      EXPECT_NEAR(d.g[i], (f.value(a) - f.value(b)) / (2 * h), 1e-7) << text << " d" << i;
    }
  }
  EXPECT_NEAR(Expr("sin(x)*cos(y)", names).value({0.5, 0.25, 0}), std::sin(0.5) * std::cos(0.25), 1e-15);
}

TEST(Expr, PolynomialForm) {
  std::vector<std::string> names{"X", "Y", "Z"};
  auto p = Expr("X*Z - 3/2*Y^2 + 1", names).to_poly<Q>();
  ASSERT_TRUE(p.has_value());
  P x = var(3, 0), y = var(3, 1), z = var(3, 2);
  EXPECT_EQ(*p, x * z - P(Q(3, 2)) * y * y + P(Q(1)));
  EXPECT_FALSE(Expr("sin(X)", names).to_poly<Q>().has_value());
}

TEST(Expr, ErrorsCarryColumns) {
  std::vector<std::string> names{"X", "Y"};
  try {
    Expr("X + * Y", names);
    FAIL() << "no error";
  } catch (const ExprError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(Expr("W", names), ExprError);
  EXPECT_THROW(Expr("sin(X", names), ExprError);
  EXPECT_THROW(Expr("foo(X)", names), ExprError);
  EXPECT_THROW(Expr("X)", names), ExprError);
}
