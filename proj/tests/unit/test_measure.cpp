#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "carnot/catalog.hpp"
#include "carnot/groups.hpp"
#include "carnot/measure.hpp"

using namespace carnot;

namespace {

const HomogeneousNorm& engel_norm() {
  static const HomogeneousNorm norm(engel4(), {1.0, 0.5, 0.25});
  return norm;
}

Subspace coordinate_subspace(std::size_t q, std::vector<Eigen::Index> axes) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) b(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
  return Subspace{b};
}

}  // namespace

TEST(MetricFactor, EuclideanDisc) {
  const HomogeneousNorm norm(abelian(2), {1.0});
  const MetricFactor f = metric_factor(coordinate_subspace(2, {0, 1}), norm, 400000, 3);
  EXPECT_NEAR(f.theta, std::numbers::pi, 3 * f.standard_error);
  EXPECT_GT(f.standard_error, 0.0);
  EXPECT_LT(f.standard_error, 0.01);
}

TEST(MetricFactor, EngelRectangleIsExact) {
  const MetricFactor f = metric_factor(coordinate_subspace(4, {1, 2}), engel_norm(), 10000, 1);
  EXPECT_DOUBLE_EQ(f.theta, 4 * 1.0 * 0.5);
  EXPECT_EQ(f.standard_error, 0.0);
  PVector tau({1, 1, 2, 3}, 2);
  tau.set({1, 2}, -3.0);
  EXPECT_DOUBLE_EQ(metric_factor(tau, engel_norm(), 10000, 1).theta, 2.0);
}

TEST(MetricFactor, Preconditions) {
  EXPECT_THROW(metric_factor(coordinate_subspace(4, {1, 2}), HomogeneousNorm(), 10, 1), PreconditionError);
  EXPECT_THROW(metric_factor(coordinate_subspace(4, {1, 2}), engel_norm(), 0, 1), PreconditionError);
  PVector tau({1, 1, 2, 3}, 2);
  tau.set({0, 1}, 1.0);
  tau.set({2, 3}, 1.0);
  EXPECT_THROW(metric_factor(tau, engel_norm(), 10, 1), PreconditionError);
  EXPECT_THROW(metric_factor(PVector({1, 1, 2, 3}, 2), engel_norm(), 10, 1), PreconditionError);
}

TEST(PVectorSubspace, RecoversFactors) {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 0, -1;
  b << 0, 1, 3, 1;
  const PVector tau = PVector::wedge_columns({1, 1, 2, 3}, (Eigen::MatrixXd(4, 2) << a, b).finished());
  const Subspace s = pvector_subspace(tau);
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_LT(s.distance(a), 1e-12);
  EXPECT_LT(s.distance(b), 1e-12);
}

TEST(IntrinsicMeasure, TrivialPlaneUnitSquare) {
  const Submanifold& plane = catalog_submanifold("engel4", "trivial-plane");
  const ParameterBox square{{0, 0}, {1, 1}};
  EXPECT_NEAR(intrinsic_measure(plane, square).value, 1.0, 1e-12);
  QuadratureOptions mc;
  mc.method = QuadratureOptions::Method::MonteCarlo;
  mc.samples = 5000;
  const MeasureResult r = intrinsic_measure(plane, square, mc);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_EQ(r.method, "monte-carlo");
}

TEST(IntrinsicMeasure, RegionPreconditions) {
  const Submanifold& plane = catalog_submanifold("engel4", "trivial-plane");
  EXPECT_EQ(intrinsic_measure(plane, ParameterBox{{0.2, 0.3}, {0.2, 0.3}}).value, 0.0);
  EXPECT_THROW(intrinsic_measure(plane, ParameterBox{{0.5, 0}, {0.2, 1}}), PreconditionError);
  EXPECT_THROW(intrinsic_measure(plane, ParameterBox{{0, 0}, {2, 1}}), PreconditionError);
  EXPECT_THROW(intrinsic_measure(plane, ParameterBox{{0}, {1}}), DimensionError);
}

TEST(IntrinsicMeasure, Deg3DensityIsExpTwoY) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  for (double x : {-0.8, 0.0, 0.6})
    for (double y : {-0.9, 0.0, 0.4})
      EXPECT_NEAR(intrinsic_density(m, std::vector<double>{x, y}, 3), std::exp(2 * y), 1e-12 * std::exp(2 * y));
  const double exact = 2 * (std::exp(2.0) - std::exp(-2.0)) / 2;
  EXPECT_NEAR(intrinsic_measure(m, m.domain()).value, exact, 1e-10);
}

TEST(IntrinsicMeasure, CurveInsideDegreeThreeStratum) {
  // x = y - sqrt(y^2 - 2y) stays on the degree-3 stratum; the curve has degree 2
  // and density sqrt(y^2 - 2y).
  const auto law = catalog_entry("engel4").law;
  const std::vector<Expr> model{parse_expr("y - sqrt(y^2 - 2*y)"), parse_expr("y"), parse_expr("y^2/2"),
                                parse_expr("y^2/2")};
  const Submanifold curve("sigma3-curve", law, {"y"}, ParameterBox{{2.25}, {2.5}}, engel_model_to_graded(model));
  EXPECT_EQ(submanifold_degree(curve, ParameterGrid::uniform(curve.domain(), 11)).degree, 2);
  auto primitive = [](double y) {
    const double t = y - 1;
    return (t * std::sqrt(t * t - 1) - std::acosh(t)) / 2;
  };
  EXPECT_NEAR(intrinsic_measure(curve, curve.domain()).value, primitive(2.5) - primitive(2.25), 1e-12);
}

TEST(IntrinsicMeasure, MetricIndependence) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  a(0, 1) = 0.3;
  a(2, 3) = -0.7;
  a(3, 3) = 2.0;
  QuadratureOptions options;
  options.nodes = 24;
  const ParameterBox region{{-0.5, 0.0}, {0.5, 0.5}};
  const double plain = intrinsic_measure(m, region, options).value;
  options.metric = a.transpose() * a;
  EXPECT_NEAR(intrinsic_measure(m, region, options).value, plain, 1e-10 * plain);
}

TEST(IntrinsicMeasure, AffineReparametrization) {
  // (x, y) = (2a + 0.1, -b): the measure of the image region does not depend on the chart.
  const auto law = catalog_entry("engel4").law;
  const auto& deg3 = catalog_entry("engel4").model_components.at("deg3-exp");
  std::vector<Expr> model;
  const std::map<std::string, Expr> chart{{"x", parse_expr("2*a + 0.1")}, {"y", parse_expr("-b")}};
  for (const auto& c : deg3) model.push_back(substitute(c, chart));
  const Submanifold re("deg3-chart", law, {"a", "b"}, ParameterBox{{-0.5, -1}, {0.4, 1}}, engel_model_to_graded(model));
  const double original =
      intrinsic_measure(catalog_submanifold("engel4", "deg3-exp"), ParameterBox{{-0.5, -0.4}, {0.7, 0.3}}).value;
  EXPECT_NEAR(intrinsic_measure(re, ParameterBox{{-0.3, -0.3}, {0.3, 0.4}}).value, original, 1e-10 * original);
}

TEST(DensityRatio, AbelianPlaneIsExactRectangle) {
  const Submanifold& plane = catalog_submanifold("engel4", "trivial-plane");
  DensityOptions options;
  options.samples = 200000;
  const DensityEstimate e = density_ratio(plane, std::vector<double>{0.1, -0.2}, 0.1, engel_norm(), options);
  EXPECT_NEAR(e.ratio, 2.0, std::max(3 * e.standard_error, 1e-3));
  EXPECT_GT(e.hits, 1000u);
  EXPECT_TRUE(plane.domain().contains(e.box));
}

TEST(DensityRatio, RefusesTruncatedBalls) {
  const Submanifold& plane = catalog_submanifold("engel4", "trivial-plane");
  EXPECT_THROW(density_ratio(plane, std::vector<double>{0.95, 0.0}, 0.2, engel_norm()), PreconditionError);
  EXPECT_THROW(density_ratio(plane, std::vector<double>{0.0, 0.0}, 0.0, engel_norm()), PreconditionError);
}

TEST(DensityRatio, Deg3ApproachesTheLimit) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  DensityOptions options;
  options.samples = 200000;
  const DensityLimitReport r = verify_density_limit(m, std::vector<double>{0, 0}, {0.08, 0.04, 0.02}, engel_norm(), options, 10000);
  EXPECT_EQ(r.degree, 3);
  EXPECT_DOUBLE_EQ(r.theta, 2.0);
  EXPECT_NEAR(r.tau_d_norm, 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.target, 2 * std::sqrt(2.0), 1e-12);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.ratio, r.target, 4 * row.standard_error) << "r = " << row.radius;
  EXPECT_LT(r.relative_gaps.back(), 0.01);
  EXPECT_THROW(verify_density_limit(m, std::vector<double>{0, 0}, {0.01, 0.02}, engel_norm()), PreconditionError);
}

TEST(DensityRatio, Deterministic) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  DensityOptions options;
  options.samples = 20000;
  const auto a = density_ratio(m, std::vector<double>{0.1, 0.1}, 0.05, engel_norm(), options);
  const auto b = density_ratio(m, std::vector<double>{0.1, 0.1}, 0.05, engel_norm(), options);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_EQ(a.hits, b.hits);
}
