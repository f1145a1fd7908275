#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "carnot/error.hpp"
#include "carnot/polynomial.hpp"
#include "carnot/rational.hpp"

using namespace carnot;

namespace {

Polynomial var(const std::vector<int>& w, std::size_t j) { return Polynomial::variable(w, j); }
Polynomial cst(const std::vector<int>& w, long c) { return Polynomial::constant(w, Rational(c)); }

Polynomial random_poly(std::mt19937_64& rng, const std::vector<int>& w, int terms, int max_exp) {
  std::uniform_int_distribution<int> coef(-5, 5), ex(0, max_exp), den(1, 4);
  Polynomial p(w);
  for (int t = 0; t < terms; ++t) {
    Exponents e(w.size());
    for (auto& x : e) x = static_cast<std::uint16_t>(ex(rng));
    p += Polynomial::monomial(w, e, Rational(coef(rng)) / den(rng));
  }
  return p;
}

}  // namespace

TEST(Rational, ParsesExactForms) {
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("-1/12"), Rational(-1, 12));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(parse_rational("2.5E2"), Rational(250));
  EXPECT_EQ(to_string(Rational(-2) / 4), "-1/2");
  EXPECT_EQ(parse_rational("007"), Rational(7));
  EXPECT_THROW(parse_rational("1/0"), IoError);
  EXPECT_THROW(parse_rational("abc"), IoError);
}

TEST(Rational, RationalizeRecoversSimpleFractions) {
  EXPECT_EQ(*rationalize(1.0 / 12.0), Rational(1, 12));
  EXPECT_EQ(*rationalize(-0.5), Rational(-1, 2));
  EXPECT_FALSE(rationalize(M_PI, 100, 1e-12).has_value());
}

TEST(Rational, BareissRankAgreesWithGaussianRank) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(-3, 3), den(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + trial % 5, cols = 1 + (trial / 5) % 5;
    RationalMatrix m(rows, RationalVector(cols));
    for (auto& r : m)
      for (auto& x : r) x = Rational(d(rng)) / den(rng);
    if (trial % 3 == 0 && rows > 1) m[rows - 1] = m[0];  // force dependence
    // Plain Gaussian elimination over Q as the reference.
    RationalMatrix g = m;
    std::size_t rank = 0;
    for (int c = 0; c < cols && rank < g.size(); ++c) {
      std::size_t piv = rank;
      while (piv < g.size() && g[piv][c] == 0) ++piv;
      if (piv == g.size()) continue;
      std::swap(g[piv], g[rank]);
      for (std::size_t r = rank + 1; r < g.size(); ++r) {
        const Rational f = g[r][c] / g[rank][c];
        for (int k = 0; k < cols; ++k) g[r][k] -= f * g[rank][k];
      }
      ++rank;
    }
    EXPECT_EQ(exact_rank(m), rank) << "trial " << trial;
  }
}

TEST(Rational, InverseAndResidual) {
  RationalMatrix m{{Rational(2), Rational(1)}, {Rational(1), Rational(1)}};
  const auto inv = exact_inverse(m);
  EXPECT_EQ(inv[0][0], Rational(1));
  EXPECT_EQ(inv[0][1], Rational(-1));
  EXPECT_EQ(inv[1][1], Rational(2));
  EXPECT_THROW(exact_inverse({{Rational(1), Rational(2)}, {Rational(2), Rational(4)}}), PreconditionError);
  const auto res = exact_residual({{Rational(1), Rational(0), Rational(0)}}, {Rational(3), Rational(4), Rational(0)});
  EXPECT_EQ(res, (RationalVector{Rational(0), Rational(4), Rational(0)}));
}

TEST(Polynomial, RingBasics) {
  const std::vector<int> w{1, 1};
  const auto x1 = var(w, 0), x2 = var(w, 1);
  EXPECT_TRUE(add(x1, -x1).is_zero());
  EXPECT_EQ(mul(x1, x2).to_string(), "x1*x2");
  EXPECT_EQ(mul(x1 + x2, x1 - x2), x1 * x1 - x2 * x2);
  EXPECT_EQ(scale(Rational(1, 2), x1).to_string(), "1/2*x1");
  EXPECT_THROW(add(x1, var({1, 2}, 0)), DimensionError);
}

TEST(Polynomial, Substitute) {
  const std::vector<int> w1{1};
  const auto x = var(w1, 0);
  const std::vector<Polynomial> shift{x + cst(w1, 1)};
  EXPECT_EQ((x * x).substitute(shift), x * x + Rational(2) * x + cst(w1, 1));

  const std::vector<int> w{1, 1};
  const auto x1 = var(w, 0), x2 = var(w, 1);
  const Polynomial p = x1 * x1 * x2 - Rational(3) * x2;
  const std::vector<Polynomial> id{x1, x2}, swap{x2, x1};
  EXPECT_EQ(p.substitute(id), p);
  EXPECT_EQ((x1 * x2).substitute(swap), x1 * x2);
  EXPECT_THROW(p.substitute(std::vector<Polynomial>{x1}), DimensionError);
}

TEST(Polynomial, WeightedDegree) {
  const std::vector<int> w{1, 1, 2};
  EXPECT_TRUE((var(w, 0) * var(w, 1) + var(w, 2)).is_weighted_homogeneous(2));
  EXPECT_FALSE((var(w, 0) + var(w, 2)).weighted_degree().has_value());
  EXPECT_FALSE(Polynomial(w).weighted_degree().has_value());
  const std::vector<int> engel{1, 1, 2, 3};
  EXPECT_EQ((var(engel, 0) * var(engel, 0) * var(engel, 1) - var(engel, 3)).weighted_degree(), 3);
}

TEST(Polynomial, DerivativeAndEvaluate) {
  const std::vector<int> w{1, 1};
  const auto x1 = var(w, 0), x2 = var(w, 1);
  EXPECT_EQ((x1 * x1 * x2).partial_derivative(0), Rational(2) * x1 * x2);
  EXPECT_TRUE(x1.partial_derivative(1).is_zero());
  EXPECT_THROW(x1.partial_derivative(2), DimensionError);
  const std::vector<int> w1{1};
  const std::vector<double> three{3.0};
  EXPECT_DOUBLE_EQ((Rational(1, 2) * (var(w1, 0) * var(w1, 0))).evaluate(three), 4.5);
}

TEST(Polynomial, CanonicalPrinting) {
  const std::vector<int> w{1, 1, 2};
  const auto x1 = var(w, 0), x2 = var(w, 1), x3 = var(w, 2);
  const Polynomial p = x3 + Rational(1, 2) * x1 * x2 - cst(w, 2);
  // Total degree first, so x3 precedes x1*x2.
  EXPECT_EQ(p.to_string(), "-2 + x3 + 1/2*x1*x2");
  EXPECT_EQ(Polynomial(w).to_string(), "0");
}

TEST(PolynomialProperty, RingAxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  const std::vector<int> w{1, 1, 2};
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_poly(rng, w, 4, 2), b = random_poly(rng, w, 4, 2), c = random_poly(rng, w, 4, 2);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * b, b * a);
  }
}

TEST(PolynomialProperty, EvaluationIsMultiplicative) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const std::vector<int> w{1, 1, 2};
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_poly(rng, w, 5, 3), b = random_poly(rng, w, 5, 3);
    const std::vector<double> v{u(rng), u(rng), u(rng)};
    const double expect = a.evaluate(v) * b.evaluate(v);
    EXPECT_NEAR((a * b).evaluate(v), expect, 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST(PolynomialProperty, ChainRuleForSubstitution) {
  std::mt19937_64 rng(13);
  const std::vector<int> w{1, 1};
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_poly(rng, w, 3, 2);
    const std::vector<Polynomial> g{random_poly(rng, w, 3, 2), random_poly(rng, w, 3, 2)};
    for (std::size_t j = 0; j < 2; ++j) {
      Polynomial chain(w);
      for (std::size_t k = 0; k < 2; ++k) chain += p.partial_derivative(k).substitute(g) * g[k].partial_derivative(j);
      EXPECT_EQ(p.substitute(g).partial_derivative(j), chain);
    }
  }
}
