#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

/// Point of the group in graded (exponential) coordinates x -> exp(sum x_j X_j).
using Point = Eigen::VectorXd;

/// Vector of compiled polynomials sharing one variable space.
class CompiledPolyVector {
 public:
  CompiledPolyVector() = default;
  explicit CompiledPolyVector(const std::vector<Polynomial>& polys);
  /// Evaluates every polynomial at `point` into out (resized to size()).
  void evaluate(std::span<const double> point, Eigen::VectorXd& out) const;
  std::size_t size() const { return polys_.size(); }

 private:
  std::vector<CompiledPolynomial> polys_;
  unsigned max_exponent_ = 0;
};

/// Result of the exact structural checks on a group law.
struct LawStructureReport {
  bool ok = true;
  std::string failure;  ///< empty when ok
};

/// The group law x . y = P(x, y) = x + y + Q(x, y) in graded coordinates,
/// computed exactly from the BCH series. Variables of P are (x_1..x_q, y_1..y_q).
class GroupLaw {
 public:
  /// Sums the Dynkin form of the BCH series up to commutators of length `step`.
  static GroupLaw compute(const StratifiedAlgebra& algebra);

  const StratifiedAlgebra& algebra() const { return algebra_; }
  std::size_t dimension() const { return algebra_.dimension(); }
  const std::vector<Polynomial>& product() const { return product_; }
  const std::vector<Polynomial>& remainder() const { return remainder_; }
  /// fields()[i][j] = X_ij(x) = dP_i/dy_j (x, 0), polynomials in q variables.
  const std::vector<std::vector<Polynomial>>& fields() const { return fields_; }

  Point multiply(const Point& x, const Point& y) const;
  /// x^{-1} y, evaluated through a law in (x, y - x) so that it vanishes exactly at y = x
  /// and keeps relative accuracy for nearby points.
  Point relative(const Point& x, const Point& y) const;
  /// Exponential coordinates: the inverse of x is -x.
  Point inverse(const Point& x) const;
  Point dilate(double r, const Point& x) const;
  /// Matrix (X_ij(x)); column j holds the coordinates of X_j at x.
  Eigen::MatrixXd field_matrix(const Point& x) const;
  /// dP/dy at (x, y), i.e. the differential of left translation by x at y.
  Eigen::MatrixXd left_translation_jacobian(const Point& x, const Point& y) const;

  /// P(x,0)=x, P(0,y)=y, Q vanishing on the first layer, Q_i depending only on
  /// lower layers and weighted-homogeneous of degree d(i), plus associativity.
  LawStructureReport check_structure(bool include_associativity = true) const;
  /// Exact identity P(P(x,y),z) == P(x,P(y,z)) in 3q variables.
  bool is_associative() const;

  /// Canonical text for P_i using names x1..xq, y1..yq.
  std::string product_to_string(std::size_t i) const;

 private:
  void check_point(const Point& x) const;

  StratifiedAlgebra algebra_;
  std::vector<Polynomial> product_;
  std::vector<Polynomial> remainder_;
  std::vector<std::vector<Polynomial>> fields_;
  CompiledPolyVector product_eval_;
  CompiledPolyVector relative_eval_;  // P(-x, x + d) in variables (x, d)
  std::vector<CompiledPolyVector> field_eval_;         // one per column j
  std::vector<CompiledPolyVector> translation_eval_;   // dP/dy_j, one per column j
};

inline GroupLaw compute_group_law(const StratifiedAlgebra& algebra) { return GroupLaw::compute(algebra); }

/// delta_r in graded coordinates: coordinate j scales by r^{d(j)}; requires r > 0.
Point dilate(const StratifiedAlgebra& algebra, double r, const Point& x);

struct IdealMembershipReport {
  bool holds = true;
  std::optional<std::size_t> failing_index;  ///< 0-based i outside J
  Polynomial residual;                      ///< Q_i with x_l = y_l = 0 for l outside J
};

/// For a subalgebra span{X_j : j in J}, checks that every Q_i with i outside J
/// lies in the ideal generated by {x_l, y_l : l outside J}.
IdealMembershipReport ideal_membership_check(const GroupLaw& law, const std::vector<std::size_t>& subset);

/// N(v) = max_k (|v^(k)|_2 / eps_k)^(1/k) over the layer blocks of v.
class HomogeneousNorm {
 public:
  HomogeneousNorm() = default;  ///< uncalibrated; evaluating it throws
  HomogeneousNorm(const StratifiedAlgebra& algebra, std::vector<double> epsilons);

  bool calibrated() const { return !epsilons_.empty(); }
  const std::vector<double>& epsilons() const { return epsilons_; }
  double operator()(const Eigen::VectorXd& v) const;
  /// Norm of v restricted to layer k (1-based), before taking the k-th root.
  double layer_norm(const Eigen::VectorXd& v, int k) const;

 private:
  std::vector<double> epsilons_;
  std::vector<std::size_t> layer_begin_;
  std::vector<std::size_t> layer_size_;
};

/// rho(x, y) = N(x^{-1} y).
double homogeneous_distance(const HomogeneousNorm& norm, const GroupLaw& law, const Point& x, const Point& y);

struct CalibrationOptions {
  std::size_t sample_count = 20000;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
};

struct CalibrationResult {
  HomogeneousNorm norm;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  /// Largest sampled N(ab) / (N(a) + N(b)) with the chosen constants.
  double worst_ratio = 0.0;
};

/// Picks eps_1 = 1 and, layer by layer, the largest eps_k in (0, 1] for which the
/// triangle inequality holds on every sampled pair. Throws NumericalError when
/// no admissible value is found.
CalibrationResult calibrate_norm(const GroupLaw& law, const CalibrationOptions& options);

}  // namespace carnot
