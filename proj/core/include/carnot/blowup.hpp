#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carnot/group.hpp"
#include "carnot/manifold.hpp"
#include "carnot/multivec.hpp"

namespace carnot {

struct PointCloud {
  std::vector<Point> points;
  std::string source;  ///< "dilated-manifold", "subspace", "curve" or "custom"
  double radius = 0.0;  ///< points satisfy N(x) <= radius; zero when unconstrained
  /// Optional parametrization used to refine nearest-point searches. The chart
  /// may throw outside its domain; `admissible` restricts it further.
  std::function<Point(const Eigen::VectorXd&)> chart;
  std::function<bool(const Point&)> admissible;
  std::vector<Eigen::VectorXd> chart_coordinates;  ///< one per point when chart is set
  std::size_t attempts = 0;
  bool undersampled = false;
  bool truncated = false;  ///< the rho-ball reached the parameter domain

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// delta_{1/r}(Phi(u)^{-1} Phi(u')) for u' sampled near u, keeping points with N <= R.
/// Throws NumericalError when no point lands in D_R.
PointCloud dilated_sample(const Submanifold& m, std::span<const double> u, double r, double R, std::size_t n,
                          const HomogeneousNorm& norm, std::uint64_t seed = 1);

/// A set that may be a blow-up limit: a linear span with an optional extra
/// membership constraint (e.g. a half-plane).
struct CandidateSet {
  std::string description;
  Subspace span;
  std::function<bool(const Point&)> contains;  ///< empty means the whole span
};

CandidateSet subspace_candidate(const Subspace& span, std::string description = "subspace");

/// Uniform sample of the candidate set intersected with D_R.
PointCloud candidate_sample(const CandidateSet& set, const HomogeneousNorm& norm, double R, std::size_t n,
                            std::uint64_t seed = 1);

enum class DistanceMetric { Rho, Euclidean };
enum class Direction { Symmetric, Forward, Backward };

struct DistanceOptions {
  DistanceMetric metric = DistanceMetric::Rho;
  Direction direction = Direction::Symmetric;
  bool refine = true;  ///< Nelder-Mead refinement on the target cloud's chart
};

struct HausdorffDistance {
  double value = 0.0;     ///< max of the computed directed distances
  double forward = 0.0;   ///< sup over a in A of d(a, B); NaN when not computed
  double backward = 0.0;  ///< sup over b in B of d(b, A); NaN when not computed
  Point forward_witness;
  Point backward_witness;
};

/// Throws PreconditionError on an empty cloud.
HausdorffDistance hausdorff_distance(const PointCloud& a, const PointCloud& b, const GroupLaw& law,
                                     const HomogeneousNorm& norm, const DistanceOptions& options = {});

struct SubgroupReport {
  bool is_subgroup = true;
  bool bracket_closed = true;
  bool exact_bracket_check = false;  ///< span rationalized and checked in exact arithmetic
  bool product_closed = true;
  bool inverse_closed = true;
  std::optional<Point> witness;
  std::string witness_kind;  ///< "bracket", "product" or "inverse"
  std::string detail;
};

/// Bracket closure of the span, then sampled BCH products and inverses; the
/// basis directions are probed before random samples.
SubgroupReport subgroup_check(const CandidateSet& set, const GroupLaw& law, std::size_t samples = 200,
                              std::uint64_t seed = 1);
SubgroupReport subgroup_check(const Subspace& span, const GroupLaw& law, std::size_t samples = 200, std::uint64_t seed = 1);

struct BlowupOptions {
  double R = 1.0;
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  bool refine = true;
  std::size_t subgroup_samples = 200;
  /// Limit candidate; defaults to Pi_Sigma, which requires a point of maximum degree.
  std::optional<CandidateSet> limit;
};

struct BlowupRow {
  double r = 0.0;
  HausdorffDistance rho;
  HausdorffDistance euclidean;
  std::size_t sigma_points = 0;
  std::size_t limit_points = 0;
  bool undersampled = false;
  bool truncated = false;
};

struct BlowupReport {
  int point_degree = 0;
  int reference_degree = 0;
  bool maximal = false;
  std::string limit_description;
  std::vector<BlowupRow> rows;
  double rho_slope = 0.0;        ///< log-log slope of the symmetric rho distance; +inf if all vanish
  double euclidean_slope = 0.0;  ///< same for the Euclidean distance in graded coordinates
  bool rho_decreasing = false;
  SubgroupReport subgroup;
  std::vector<std::string> warnings;
};

BlowupReport verify_blowup(const Submanifold& m, std::span<const double> u, const std::vector<double>& radii,
                           const HomogeneousNorm& norm, const BlowupOptions& options = {});

/// Least-squares slope of log(y) against log(x); +inf when every y is zero.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CurveSolution {
  Eigen::VectorXd lambda;                        ///< one entry per frame column, grouped by layer
  std::vector<double> t_grid;                    ///< starts at 0
  std::vector<Point> states;                     ///< gamma(t, lambda)
  std::vector<std::vector<double>> param_states; ///< u(t) with Phi(u(t)) = gamma
  std::vector<Eigen::VectorXd> adapted;          ///< B^T (base^{-1} gamma) in the adapted basis
  std::vector<int> layers;                       ///< layer of each adapted coordinate
  double max_residual = 0.0;
  double min_pivot_ratio = 1.0;
};

/// Classical RK4 for u' = M(u)^{-1} w(t) with w_j = lambda_j t^{sigma(j)-1}, so that
/// gamma' = sum_j w_j v_j(gamma) for the frozen-pivot frame v. Throws NumericalError
/// when the frame stops being valid, the tangency residual exceeds 1e-8 or the
/// curve leaves the domain.
CurveSolution integrate_curve(const Submanifold& m, const AdaptedFrame& frame, const Eigen::VectorXd& lambda,
                              double t_max, std::size_t steps = 10000);

struct AsymptoticFit {
  Eigen::VectorXd G;                    ///< per frame column
  std::vector<double> residual_slopes;  ///< per adapted coordinate; +inf when the residual vanishes
  std::vector<int> layers;              ///< layer of each adapted coordinate
  std::vector<bool> pivot;              ///< coordinate is a pivot row
};

/// Richardson extrapolation of c_i(t)/t^sigma(i) over the given t values, which
/// must lie on the solution grid.
AsymptoticFit extract_G(const CurveSolution& solution, const AdaptedFrame& frame, const std::vector<double>& t_values);

struct CoverageRow {
  std::vector<double> target;
  Eigen::VectorXd lambda;  ///< gamma(1, lambda) is the closest curve point found
  double miss = 0.0;       ///< rho(gamma(1, lambda), Phi(target))
  bool converged = false;
  std::string note;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  double worst_miss = 0.0;
};

/// Uses gamma(t, delta_s lambda) = gamma(s t, lambda) to search over lambda at t = 1.
CoverageReport coverage_diagnostic(const Submanifold& m, const AdaptedFrame& frame,
                                   const std::vector<std::vector<double>>& targets, const HomogeneousNorm& norm,
                                   std::size_t steps = 200);

}  // namespace carnot
