#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "carnot/error.hpp"
#include "carnot/multivec.hpp"

using namespace carnot;

namespace {

const std::vector<int> kEngel{1, 1, 2, 3};

PVector x(std::size_t j) { return PVector::basis(kEngel, {j}); }

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double c : xs) v[i++] = c;
  return v;
}

}  // namespace

TEST(PVector, Wedge) {
  const PVector x12 = wedge(x(0), x(1));
  EXPECT_EQ(x12.coefficient({0, 1}), 1.0);
  EXPECT_EQ(wedge(x(1), x(0)).coefficient({0, 1}), -1.0);
  EXPECT_TRUE(wedge(x(0) + x(2), x(0) + x(2)).is_zero());
  const PVector w = wedge(x(0) + x(1), x(2));
  EXPECT_EQ(w.coefficients().size(), 2u);
  EXPECT_EQ(w.coefficient({0, 2}), 1.0);
  EXPECT_EQ(w.coefficient({1, 2}), 1.0);
  const PVector three = wedge(wedge(x(2), x(0)), x(1));  // X3^X1^X2 = X1^X2^X3
  EXPECT_EQ(three.coefficient({0, 1, 2}), 1.0);
  EXPECT_THROW(wedge(wedge(wedge(x(0), x(1)), x(2)), wedge(x(3), x(0))), PreconditionError);
}

TEST(PVector, WedgeColumnsMatchesIteratedWedge) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd m(4, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    const PVector a = PVector::wedge_columns(kEngel, m);
    const PVector b = wedge(wedge(PVector::from_vector(kEngel, m.col(0)), PVector::from_vector(kEngel, m.col(1))),
                            PVector::from_vector(kEngel, m.col(2)));
    for (const auto& [j, c] : b.coefficients()) EXPECT_NEAR(a.coefficient(j), c, 1e-12);
  }
}

TEST(PVector, DegreeProjection) {
  const PVector t = wedge(x(0), x(1)) + 2.0 * wedge(x(0), x(2));
  const PVector p3 = t.degree_projection(3);
  EXPECT_EQ(p3.coefficients().size(), 1u);
  EXPECT_EQ(p3.coefficient({0, 2}), 2.0);
  EXPECT_TRUE(t.degree_projection(6).is_zero());
  PVector sum(kEngel, 2);
  for (int r = 0; r <= max_degree(kEngel, 2); ++r) sum += t.degree_projection(r);
  EXPECT_EQ(sum.coefficients(), t.coefficients());
}

TEST(PVector, Degree) {
  EXPECT_EQ(wedge(x(0), x(1)).degree(), 2);
  EXPECT_EQ(wedge(x(2), x(3)).degree(), 5);
  EXPECT_EQ((wedge(x(0), x(1)) + 0.5 * wedge(x(0), x(3))).degree(), 4);
  EXPECT_EQ((wedge(x(0), x(1)) + 1e-12 * wedge(x(0), x(3))).degree(1e-9), 2);
  EXPECT_THROW(PVector(kEngel, 2).degree(), PreconditionError);
  EXPECT_EQ(max_degree(kEngel, 2), 5);
  EXPECT_EQ(max_degree({1, 1, 2, 3, 4}, 2), 7);
}

TEST(PVector, Norm) {
  EXPECT_DOUBLE_EQ(wedge(x(0), x(1)).norm(), 1.0);
  EXPECT_DOUBLE_EQ((3.0 * wedge(x(1), x(2))).norm(), 3.0);
}

TEST(PVector, NormSplitsOverDegrees) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(4, 2);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  const PVector t = PVector::wedge_columns(kEngel, m);
  double s = 0;
  for (int r = 0; r <= 5; ++r) s += std::pow(t.degree_projection(r).norm(), 2);
  EXPECT_NEAR(s, t.norm() * t.norm(), 1e-12);
}

TEST(PVector, DegreeInvariantUnderLayerRotation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd m(4, 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    if (t % 3 == 0) m.row(3).setZero();  // lower-degree cases
    if (t % 5 == 0) m.row(2).setZero();
    const double a = angle(rng);
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(4, 4);
    r.block(0, 0, 2, 2) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    r(2, 2) = t % 2 ? -1.0 : 1.0;
    EXPECT_EQ(PVector::wedge_columns(kEngel, m).degree(), PVector::wedge_columns(kEngel, r * m).degree());
  }
}

TEST(Subspace, FromFactors) {
  const Subspace s = subspace_from_factors({vec({0, 1, 0, 0}), vec({0, 1, 1, 0})});
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_NEAR(s.distance(vec({0, 3, -2, 0})), 0.0, 1e-15);
  EXPECT_NEAR(s.distance(vec({1, 0, 0, 1})), std::sqrt(2.0), 1e-15);
  EXPECT_TRUE((s.basis.transpose() * s.basis).isIdentity(1e-14));
  EXPECT_THROW(subspace_from_factors({vec({0, 1, 0, 0}), vec({0, 2, 0, 0})}), PreconditionError);
}
