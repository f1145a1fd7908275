#include <gtest/gtest.h>

#include <random>

#include "carnot/error.hpp"
#include "carnot/group.hpp"
#include "carnot/groups.hpp"

using namespace carnot;

namespace {

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

Point random_point(std::mt19937_64& rng, std::size_t q, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Point p(static_cast<Eigen::Index>(q));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = u(rng);
  return p;
}

const GroupLaw& engel_law() {
  static const GroupLaw law = GroupLaw::compute(engel4());
  return law;
}

}  // namespace

TEST(GroupLaw, HeisenbergProduct) {
  const auto law = GroupLaw::compute(heisenberg(1));
  EXPECT_EQ(law.product_to_string(2), "x3 + y3 + 1/2*x1*y2 - 1/2*x2*y1");
  EXPECT_EQ(law.product_to_string(0), "x1 + y1");
  EXPECT_EQ(law.fields()[2][1].to_string(), "1/2*x1");
  EXPECT_EQ(law.fields()[2][0].to_string(), "-1/2*x2");
}

TEST(GroupLaw, EngelProductMatchesHandExpansion) {
  const auto& law = engel_law();
  EXPECT_EQ(law.product_to_string(2), "x3 + y3 + 1/2*x1*y2 - 1/2*x2*y1");
  EXPECT_EQ(law.product_to_string(3),
            "x4 + y4 + 1/2*x1*y3 - 1/2*x3*y1 + 1/12*x1^2*y2 - 1/12*x1*x2*y1 - 1/12*x1*y1*y2 + 1/12*x2*y1^2");
  EXPECT_TRUE(law.remainder()[0].is_zero());
  EXPECT_TRUE(law.remainder()[1].is_zero());
  const Point p = law.multiply(pt({1, 0, 0, 0}), pt({0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0);
  EXPECT_DOUBLE_EQ(p[2], 0.5);
  EXPECT_DOUBLE_EQ(p[3], 1.0 / 12.0);
}

TEST(GroupLaw, AbelianIsAddition) {
  const auto law = GroupLaw::compute(abelian(3));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(law.remainder()[i].is_zero());
  const Point s = law.multiply(pt({1, 2, 3}), pt({-1, 0.5, 2}));
  EXPECT_TRUE(s.isApprox(pt({0, 2.5, 5})));
}

TEST(GroupLaw, InvalidAlgebraRefused) {
  EXPECT_THROW(GroupLaw::compute(StratifiedAlgebra({2, 1}, {})), PreconditionError);
}

TEST(GroupLaw, StructureAndAssociativity) {
  for (const auto& a : {heisenberg(1), heisenberg(2), engel4(), e5()}) {
    const auto law = GroupLaw::compute(a);
    const auto r = law.check_structure(true);
    EXPECT_TRUE(r.ok) << a.name() << ": " << r.failure;
  }
}

TEST(GroupLaw, InverseDilateAndErrors) {
  const auto& law = engel_law();
  std::mt19937_64 rng(3);
  const Point x = random_point(rng, 4);
  EXPECT_LT(law.multiply(x, law.inverse(x)).norm(), 1e-15);
  const double r = 0.3;
  EXPECT_TRUE(law.dilate(r, pt({1, 1, 1, 1})).isApprox(pt({r, r, r * r, r * r * r})));
  EXPECT_THROW(law.dilate(0.0, x), PreconditionError);
  EXPECT_THROW(law.dilate(-1.0, x), PreconditionError);
  EXPECT_THROW(law.multiply(pt({1, 2}), x), DimensionError);
}

TEST(GroupLaw, DilationIsAutomorphism) {
  const auto law = GroupLaw::compute(e5());
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const Point x = random_point(rng, 5), y = random_point(rng, 5);
    const double r = 0.1 + t * 0.05;
    EXPECT_TRUE(law.dilate(r, law.multiply(x, y)).isApprox(law.multiply(law.dilate(r, x), law.dilate(r, y)), 1e-12));
  }
}

TEST(GroupLaw, FieldsAreUnitriangularAndHomogeneous) {
  for (const auto& a : {heisenberg(1), engel4(), e5()}) {
    const auto law = GroupLaw::compute(a);
    const std::size_t q = a.dimension();
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) {
        const Polynomial& x = law.fields()[i][j];
        if (a.degree_of(i) <= a.degree_of(j)) {
          EXPECT_EQ(x, Polynomial::constant(a.degrees(), Rational(i == j ? 1 : 0))) << i << "," << j;
        } else if (!x.is_zero()) {
          EXPECT_TRUE(x.is_weighted_homogeneous(a.degree_of(i) - a.degree_of(j)));
        }
      }
  }
}

TEST(GroupLaw, FieldsAreLeftInvariant) {
  const auto law = GroupLaw::compute(e5());
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Point z = random_point(rng, 5), x = random_point(rng, 5);
    const Eigen::MatrixXd pushed = law.left_translation_jacobian(z, x) * law.field_matrix(x);
    EXPECT_LT((pushed - law.field_matrix(law.multiply(z, x))).norm(), 1e-10);
  }
}

TEST(IdealMembership, EngelAndAbelian) {
  const auto& law = engel_law();
  EXPECT_TRUE(ideal_membership_check(law, {1, 2}).holds);
  EXPECT_TRUE(ideal_membership_check(law, {0, 1, 2, 3}).holds);
  EXPECT_TRUE(ideal_membership_check(law, {3}).holds);
  EXPECT_THROW(ideal_membership_check(law, {0, 1}), PreconditionError);
  const auto flat = GroupLaw::compute(abelian(3));
  EXPECT_TRUE(ideal_membership_check(flat, {0}).holds);
}

TEST(HomogeneousNorm, AxiomsByConstruction) {
  const auto& law = engel_law();
  const HomogeneousNorm norm(law.algebra(), {1.0, 0.5, 0.25});
  EXPECT_DOUBLE_EQ(homogeneous_distance(norm, law, Point::Zero(4), pt({1, 0, 0, 0})), 1.0);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const Point x = random_point(rng, 4), y = random_point(rng, 4);
    const double r = 0.05 + 0.1 * t;
    EXPECT_NEAR(norm(law.dilate(r, x)), r * norm(x), 1e-12 * (1 + r));
    EXPECT_DOUBLE_EQ(norm(-x), norm(x));
    EXPECT_EQ(homogeneous_distance(norm, law, x, x), 0.0);
    const Point z = random_point(rng, 4);
    EXPECT_NEAR(homogeneous_distance(norm, law, law.multiply(z, x), law.multiply(z, y)),
                homogeneous_distance(norm, law, x, y), 1e-12);
  }
  EXPECT_THROW(HomogeneousNorm()(Point::Zero(4)), PreconditionError);
  EXPECT_THROW(homogeneous_distance(HomogeneousNorm(), law, Point::Zero(4), Point::Zero(4)), PreconditionError);
  EXPECT_THROW(HomogeneousNorm(law.algebra(), {1.0, 1.0}), DimensionError);
}

TEST(Calibration, AbelianAndHeisenberg) {
  const auto flat = GroupLaw::compute(abelian(2));
  const auto fr = calibrate_norm(flat, {10000, 1e-9, 1});
  EXPECT_EQ(fr.norm.epsilons(), std::vector<double>{1.0});

  const auto h = GroupLaw::compute(heisenberg(1));
  const auto hr = calibrate_norm(h, {20000, 1e-9, 42});
  ASSERT_EQ(hr.norm.epsilons().size(), 2u);
  EXPECT_GT(hr.norm.epsilons()[1], 0.0);
  EXPECT_LE(hr.norm.epsilons()[1], 1.0);
  EXPECT_LE(hr.worst_ratio, 1.0 + 1e-9);
  EXPECT_THROW(calibrate_norm(h, {100, 1e-9, 1}), PreconditionError);
}

TEST(Calibration, DeterministicForSeed) {
  const auto law = GroupLaw::compute(e5());
  const auto a = calibrate_norm(law, {10000, 1e-9, 9});
  const auto b = calibrate_norm(law, {10000, 1e-9, 9});
  EXPECT_EQ(a.norm.epsilons(), b.norm.epsilons());
  EXPECT_EQ(a.worst_ratio, b.worst_ratio);
}

TEST(Calibration, SampledTriangleInequalityOnFreshTriples) {
  const auto& law = engel_law();
  const auto cal = calibrate_norm(law, {20000, 1e-9, 5});
  std::mt19937_64 rng(77);
  for (int t = 0; t < 2000; ++t) {
    const Point x = random_point(rng, 4, 2.0), y = random_point(rng, 4, 2.0), z = random_point(rng, 4, 2.0);
    const double lhs = homogeneous_distance(cal.norm, law, x, z);
    const double rhs = homogeneous_distance(cal.norm, law, x, y) + homogeneous_distance(cal.norm, law, y, z);
    EXPECT_LE(lhs, rhs * (1 + 1e-9));
  }
}
