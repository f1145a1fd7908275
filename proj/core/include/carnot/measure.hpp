#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carnot/group.hpp"
#include "carnot/manifold.hpp"
#include "carnot/multivec.hpp"

namespace carnot {

struct MeasureResult {
  double value = 0.0;
  double standard_error = 0.0;  ///< zero for grid quadrature
  std::size_t sample_count = 0;
  std::string method;           ///< "grid" or "monte-carlo"
};

/// |(d_1 Phi ^ ... ^ d_p Phi)_d| in the left-invariant frame. With a metric the
/// unit p-vector and the area element are both taken in that metric.
double intrinsic_density(const Submanifold& m, std::span<const double> u, int degree,
                         const std::optional<Eigen::MatrixXd>& metric = std::nullopt);
/// Same, with d(Sigma) taken from a 21-per-axis degree survey of the domain.
double intrinsic_density(const Submanifold& m, std::span<const double> u);

struct QuadratureOptions {
  enum class Method { Grid, MonteCarlo };
  Method method = Method::Grid;
  std::size_t nodes = 64;              ///< Gauss-Legendre nodes per axis
  std::size_t samples = 100000;        ///< Monte Carlo sample count
  std::uint64_t seed = 1;
  std::optional<int> degree;           ///< d(Sigma); surveyed when absent
  std::optional<Eigen::MatrixXd> metric;
};

/// Integral of the intrinsic density over a sub-box of the domain.
MeasureResult intrinsic_measure(const Submanifold& m, const ParameterBox& region, const QuadratureOptions& options = {});

struct MetricFactor {
  double theta = 0.0;
  double standard_error = 0.0;
  std::size_t sample_count = 0;
  Subspace subspace;
  std::vector<double> epsilons;
};

/// Lebesgue p-measure of {v in L : N(v) < 1} estimated by Monte Carlo in the
/// orthonormal coordinates of L over the box implied by the layer bounds.
MetricFactor metric_factor(const Subspace& subspace, const HomogeneousNorm& norm, std::size_t sample_count,
                           std::uint64_t seed);
/// For a simple p-vector; throws PreconditionError when it is zero or not simple.
MetricFactor metric_factor(const PVector& tau_d, const HomogeneousNorm& norm, std::size_t sample_count, std::uint64_t seed);

struct BallBox {
  ParameterBox box;                 ///< clamped to the domain
  std::vector<double> half_widths;  ///< before clamping, centred on u
  bool truncated = false;           ///< the ball reaches the domain boundary
  std::size_t pilot_rounds = 0;
};

/// Parameter box containing Phi^{-1}(B_rho(Phi(u), r)), found by pilot sampling.
/// With refuse_truncation a ball that reaches the domain boundary throws PreconditionError.
BallBox rho_ball_box(const Submanifold& m, std::span<const double> u, double r, const HomogeneousNorm& norm,
                     std::uint64_t seed, bool refuse_truncation);

struct DensityOptions {
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  std::size_t strata_per_axis = 32;
  std::optional<int> degree;   ///< d(Sigma); the point degree when absent
};

struct DensityEstimate {
  double radius = 0.0;
  double ratio = 0.0;            ///< area of Sigma within rho-distance r, divided by r^d
  double standard_error = 0.0;
  std::size_t sample_count = 0;
  std::size_t hits = 0;
  ParameterBox box;              ///< parameter box that contains the support
};

/// Throws PreconditionError when the rho-ball reaches the domain boundary.
DensityEstimate density_ratio(const Submanifold& m, std::span<const double> u, double r, const HomogeneousNorm& norm,
                              const DensityOptions& options = {});

struct DensityLimitReport {
  int degree = 0;
  double theta = 0.0;
  double theta_standard_error = 0.0;
  double tau_d_norm = 0.0;
  double target = 0.0;                 ///< theta / |tau_d|
  std::vector<DensityEstimate> rows;
  std::vector<double> relative_gaps;   ///< |ratio - target| / target per row
};

/// Runs density_ratio on decreasing radii and compares with theta(tau_d)/|tau_d|.
DensityLimitReport verify_density_limit(const Submanifold& m, std::span<const double> u, const std::vector<double>& radii,
                                        const HomogeneousNorm& norm, const DensityOptions& options = {},
                                        std::size_t theta_samples = 1000000);

}  // namespace carnot
