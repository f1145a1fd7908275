#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carnot/expr.hpp"
#include "carnot/group.hpp"
#include "carnot/multivec.hpp"

namespace carnot {

/// Closed axis-aligned box in parameter space.
struct ParameterBox {
  std::vector<double> lower, upper;

  std::size_t dimension() const { return lower.size(); }
  bool contains(std::span<const double> u) const;
  bool contains(const ParameterBox& inner) const;
  double volume() const;
};

/// Rectangular sample grid; points are enumerated with the last axis fastest.
struct ParameterGrid {
  std::vector<std::vector<double>> axes;

  /// n points per axis including both endpoints (the midpoint when n == 1).
  static ParameterGrid uniform(const ParameterBox& box, std::size_t per_axis);
  /// lower, lower + step, ... up to upper (inclusive within 1e-9 step).
  static ParameterGrid stepped(const ParameterBox& box, double step);

  std::size_t size() const;
  std::vector<double> at(std::size_t index) const;
};

/// p-dimensional submanifold of a graded group, parametrized by Phi: box -> R^q
/// with one expression per graded coordinate.
class Submanifold {
 public:
  Submanifold(std::string name, std::shared_ptr<const GroupLaw> law, std::vector<std::string> parameters,
              ParameterBox domain, std::vector<Expr> components);

  const std::string& name() const { return name_; }
  const GroupLaw& law() const { return *law_; }
  const std::shared_ptr<const GroupLaw>& law_ptr() const { return law_; }
  const StratifiedAlgebra& algebra() const { return law_->algebra(); }
  const std::vector<std::string>& parameters() const { return parameters_; }
  const ParameterBox& domain() const { return domain_; }
  const std::vector<Expr>& components() const { return components_; }
  std::size_t p() const { return parameters_.size(); }
  std::size_t q() const { return components_.size(); }

  /// Phi(u); throws PreconditionError outside the domain.
  Point point(std::span<const double> u) const;
  /// Phi(u) together with its q x p Jacobian.
  Point point(std::span<const double> u, Eigen::MatrixXd& jacobian) const;

  /// Sampled immersion check on a uniform grid: returns the first grid point where
  /// the Jacobian has relative singular value below `tolerance`, or nothing.
  std::optional<std::vector<double>> immersion_failure(std::size_t per_axis = 5, double tolerance = 1e-10) const;

 private:
  std::string name_;
  std::shared_ptr<const GroupLaw> law_;
  std::vector<std::string> parameters_;
  ParameterBox domain_;
  std::vector<Expr> components_;
  std::vector<CompiledExpr> compiled_;
};

struct TangentOptions {
  /// d(Sigma) used for tau_d; defaults to the point degree.
  std::optional<int> reference_degree;
  double tolerance = 1e-9;
  /// Gram matrix of an auxiliary left-invariant metric in the X basis; identity when absent.
  std::optional<Eigen::MatrixXd> metric;
};

struct TangentData {
  std::vector<double> parameter;
  Point point;
  Eigen::MatrixXd jacobian;             ///< q x p, dPhi/du in coordinates
  Eigen::MatrixXd frame_coefficients;   ///< q x p, dPhi/du_i in the left-invariant frame
  PVector wedge;                        ///< unnormalized wedge of the frame coefficients
  PVector tau;                          ///< unit in the auxiliary metric
  PVector tau_d;                        ///< degree projection of tau at the reference degree
  double area_element = 0.0;            ///< |wedge| in the auxiliary metric
  int point_degree = 0;
  int reference_degree = 0;
  /// Some degree component at or above the point degree has relative size in [tol, 100 tol].
  bool near_degenerate = false;
};

/// Throws PreconditionError outside the domain and on rank deficiency.
TangentData tangent_pvector(const Submanifold& m, std::span<const double> u, const TangentOptions& options = {});
int pointwise_degree(const Submanifold& m, std::span<const double> u, double tolerance = 1e-9);

struct DegreeSurvey {
  int degree = 0;
  std::vector<double> witness;           ///< first grid point attaining the degree
  std::vector<int> point_degrees;        ///< in grid order
  std::size_t near_degenerate_count = 0;
};

/// Maximum pointwise degree over a grid; throws PreconditionError on an empty grid.
DegreeSurvey submanifold_degree(const Submanifold& m, const ParameterGrid& grid, double tolerance = 1e-9);
/// d_Sigma < Q - (q - p).
bool is_horizontal_point(const Submanifold& m, std::span<const double> u, double tolerance = 1e-9);

/// Graded frame of the tangent space obtained by top-down elimination.
/// The adapted basis is basis_change (orthogonal, block diagonal by layer); within
/// layer k the first alphas[k-1] vectors are the selected X_j^k.
struct AdaptedFrame {
  std::vector<double> base_parameter;
  Point base_point;
  std::vector<std::size_t> alphas;        ///< alpha_k for k = 1..step
  Eigen::MatrixXd basis_change;           ///< q x q, columns are the adapted basis in X coordinates
  Eigen::MatrixXd frame_matrix;           ///< C, q x p, frame vectors in the adapted basis
  std::vector<std::size_t> pivot_rows;    ///< adapted-basis index of X_j^k for frame column j
  Eigen::MatrixXd pivot_block;            ///< pivot rows of the adapted tangent coefficients at the base
  int point_degree = 0;
  int reference_degree = 0;
  std::vector<std::string> warnings;

  std::size_t p() const { return pivot_rows.size(); }
  /// Layer (1-based) of frame column j.
  int sigma(std::size_t j) const;
  bool is_maximal() const { return point_degree >= reference_degree; }
};

/// Warns (in frame.warnings) at non-maximal points instead of failing. Throws
/// NumericalError when the elimination disagrees with the p-vector degree.
AdaptedFrame adapted_frame(const Submanifold& m, std::span<const double> u, const TangentOptions& options = {});

/// Span of the selected X_j^k; refuses non-maximal frames.
Subspace pi_sigma(const AdaptedFrame& frame);

/// Rational graded basis with the Pi_Sigma directions first in their layers, or
/// nothing when a direction has no small-denominator representative.
std::optional<std::vector<RationalVector>> rational_adapted_basis(const AdaptedFrame& frame, const StratifiedAlgebra& algebra);

/// Continuation of the base frame to a nearby parameter: the pivot rows are
/// kept equal to the identity.
struct FrozenFrame {
  Eigen::MatrixXd coefficients;    ///< q x p in the adapted basis
  Eigen::MatrixXd parameter_map;   ///< p x p; DPhi(u) * parameter_map gives the frame in coordinates
  double pivot_ratio = 0.0;        ///< smallest singular value of M(u) M(base)^{-1}
  bool valid() const { return pivot_ratio > 0.5; }
};

FrozenFrame frozen_frame(const Submanifold& m, const AdaptedFrame& frame, std::span<const double> u);

/// Sigma near the base point written as a graph over Pi_Sigma: base^{-1} Phi = xi + phi(xi).
struct LocalGraph {
  std::vector<Eigen::VectorXd> xi;         ///< coordinates along the selected X_j^k
  std::vector<Eigen::VectorXd> values;     ///< phi(xi) in the complementary adapted coordinates
  std::vector<std::vector<double>> parameters;
  Eigen::MatrixXd jacobian_at_origin;      ///< central differences, adapted basis, q x p
  double jacobian_error = 0.0;             ///< max |jacobian_at_origin - C|
};

/// Newton inversion on a per_axis^p grid over [-radius, radius]^p. Throws
/// NumericalError on non-convergence and PreconditionError at non-maximal frames
/// or when the Jacobian check exceeds 1e-6.
LocalGraph local_graph(const Submanifold& m, const AdaptedFrame& frame, double radius, std::size_t per_axis = 5);

}  // namespace carnot
