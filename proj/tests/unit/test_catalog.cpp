#include <gtest/gtest.h>

#include <cmath>

#include "carnot/catalog.hpp"
#include "carnot/groups.hpp"
#include "carnot/random.hpp"

using namespace carnot;

TEST(EngelModel, PsiIntertwinesTheFields) {
  const GroupLaw law = GroupLaw::compute(engel4());
  const std::vector<Polynomial> psi = engel_model_to_graded();
  const auto model = engel_model_fields();
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      Polynomial lhs(std::vector<int>{1, 1, 2, 3});
      for (std::size_t l = 0; l < 4; ++l) lhs += psi[i].partial_derivative(l) * model[j][l];
      EXPECT_EQ(lhs, law.fields()[i][j].substitute(psi)) << "X" << j + 1 << " component " << i + 1;
    }
}

TEST(EngelModel, InverseIsExact) {
  const std::vector<Polynomial> psi = engel_model_to_graded();
  const std::vector<Polynomial> inverse = engel_graded_to_model();
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(inverse[i].substitute(psi), Polynomial::variable({1, 1, 2, 3}, i));
    EXPECT_EQ(psi[i].substitute(inverse), Polynomial::variable({1, 1, 2, 3}, i));
  }
  const Point x(Eigen::Vector4d(0.3, -1.2, 0.7, 2.0));
  EXPECT_TRUE(engel_graded_to_model(engel_model_to_graded(x)).isApprox(x, 1e-15));
}

TEST(EngelModel, PolynomialToExpr) {
  const Polynomial p = engel_model_to_graded()[3];
  const std::vector<Expr> args{parse_expr("a"), parse_expr("b"), parse_expr("c"), parse_expr("d")};
  EXPECT_EQ(print_expr(polynomial_to_expr(p, args)), "d - 0.5*a*c + 1/12*a^2*b");
}

TEST(ClosedForm, Deg4Coefficients) {
  const double x = 0.7, y = -1.3;
  Eigen::MatrixXd jac(4, 2);
  jac << 1, 0, 0, 1, 0, y, 0, y;
  const PVector w = engel_wedge_closed_form(jac, x);
  EXPECT_DOUBLE_EQ(w.coefficient({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(w.coefficient({0, 2}), y - x);
  EXPECT_DOUBLE_EQ(w.coefficient({0, 3}), y - x * y + x * x / 2);
  EXPECT_EQ(w.coefficient({1, 2}), 0.0);
  EXPECT_TRUE(engel_wedge_closed_form(Eigen::MatrixXd::Zero(4, 2), 1.0).is_zero());
  EXPECT_THROW(engel_wedge_closed_form(Eigen::MatrixXd::Zero(3, 2), 1.0), DimensionError);
}

TEST(ClosedForm, GenericPipelineAgrees) {
  RandomStream rng(31, 0, 0);
  for (const auto& s : catalog_entry("engel4").submanifolds) {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const std::vector<double> u{rng.uniform(s.domain().lower[0], s.domain().upper[0]),
                                  rng.uniform(s.domain().lower[1], s.domain().upper[1])};
      Point model;
      const Eigen::MatrixXd jac = engel_model_jacobian(s, u, &model);
      const PVector oracle = engel_wedge_closed_form(jac, model[0]);
      const PVector generic = tangent_pvector(s, u).wedge;
      worst = std::max(worst, (generic + (-1.0) * oracle).norm() / oracle.norm());
    }
    EXPECT_LE(worst, 1e-12) << s.name();
  }
}

TEST(ClosedForm, RefusesOtherGroups) {
  const Submanifold& plane = catalog_submanifold("heisenberg", "vertical-plane");
  EXPECT_THROW(engel_model_jacobian(plane, std::vector<double>{0, 0}), PreconditionError);
  EXPECT_THROW(degree3_system_residual(plane, std::vector<double>{0, 0}), PreconditionError);
}

TEST(Degree3System, Residuals) {
  const Degree3Residual deg3 = degree3_system_residual(catalog_submanifold("engel4", "deg3-exp"), std::vector<double>{0.4, 0.3});
  EXPECT_LT(deg3.residuals.cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_TRUE(deg3.sufficient_condition);
  EXPECT_LT(deg3.sufficient_condition->cwiseAbs().maxCoeff(), 1e-12);
  const Degree3Residual deg4 = degree3_system_residual(catalog_submanifold("engel4", "deg4-parabola"), std::vector<double>{1, 1});
  EXPECT_NEAR(deg4.residuals[2], 0.5, 1e-15);
  EXPECT_NEAR(deg4.residuals[0], 0.0, 1e-15);
  const Degree3Residual plane = degree3_system_residual(catalog_submanifold("engel4", "trivial-plane"), std::vector<double>{0.2, 0.1});
  EXPECT_EQ(plane.residuals.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_FALSE(plane.sufficient_condition);
}

TEST(Strata, Deg4ParabolaPoints) {
  const Submanifold& m = catalog_submanifold("engel4", "deg4-parabola");
  EXPECT_EQ(pointwise_degree(m, std::vector<double>{1, 1}), 4);
  EXPECT_EQ(pointwise_degree(m, std::vector<double>{3 - std::sqrt(3.0), 3}), 3);
  EXPECT_EQ(pointwise_degree(m, std::vector<double>{0, 0}), 2);
  EXPECT_EQ(pointwise_degree(m, std::vector<double>{2, 2}), 2);
  EXPECT_EQ(deg4_parabola_expected_degree(1, 1), 4);
  EXPECT_EQ(deg4_parabola_expected_degree(2, 2), 2);
  EXPECT_EQ(deg4_parabola_expected_degree(3, 2.25), 3);
}

TEST(Strata, GridClassificationMatchesPredicate) {
  const Submanifold& m = catalog_submanifold("engel4", "deg4-parabola");
  const StrataReport r = strata_classification(m, ParameterGrid::stepped(m.domain(), 0.25), 1e-9,
                                               [](std::span<const double> u) { return deg4_parabola_expected_degree(u[0], u[1]); });
  EXPECT_TRUE(r.mismatches.empty());
  EXPECT_TRUE(r.ambiguous.empty());
  EXPECT_EQ(r.strata.at(2), (std::vector<std::vector<double>>{{0, 0}, {2, 2}}));
  EXPECT_FALSE(r.strata.at(3).empty());
  EXPECT_EQ(r.strata.at(4).size() + r.strata.at(3).size() + 2, 625u);
}

TEST(Catalog, ExpectationsHold) {
  for (const auto& name : catalog_names()) {
    for (const auto& e : catalog_entry(name).expected) {
      const ExpectationOutcome r = e.check();
      if (e.superseded_by.empty()) EXPECT_TRUE(r.passed) << e.id << ": " << r.detail;
      else EXPECT_FALSE(r.passed) << e.id << " was expected to show the known defect: " << r.detail;
      EXPECT_TRUE(e.basis == "published" || e.basis == "derived" || e.basis == "identity") << e.id;
    }
  }
}

TEST(Catalog, LookupAndDeterminism) {
  EXPECT_THROW(catalog_entry("nope"), PreconditionError);
  EXPECT_THROW(catalog_submanifold("engel4", "nope"), PreconditionError);
  EXPECT_EQ(&catalog_entry("engel4"), &catalog_entry("engel4"));
  const auto law = catalog_entry("e5").law;
  const Submanifold a = random_polynomial_surface(law, 13, 7), b = random_polynomial_surface(law, 13, 7);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.components()[i], b.components()[i]);
  EXPECT_FALSE(a.immersion_failure(7, 1e-6));
}
