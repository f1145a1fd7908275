#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/blowup.hpp"
#include "carnot/expr.hpp"
#include "carnot/group.hpp"
#include "carnot/manifold.hpp"
#include "carnot/multivec.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

// Engel group model coordinates: the fields X1 = d1, X2 = d2 + x1 d3 + x1^2/2 d4,
// X3 = d3 + x1 d4, X4 = d4 on R^4. The catalog states every Engel example in these
// coordinates and maps it into graded exponential coordinates with psi.

/// psi: model -> graded coordinates, as polynomials in x1..x4 with weights (1,1,2,3).
std::vector<Polynomial> engel_model_to_graded();
/// psi^{-1}.
std::vector<Polynomial> engel_graded_to_model();
/// Model fields: result[j][i] is the i-th coordinate of X_j.
std::vector<std::vector<Polynomial>> engel_model_fields();

Point engel_model_to_graded(const Point& x);
Point engel_graded_to_model(const Point& y);
/// Composes model-coordinate expressions with psi.
std::vector<Expr> engel_model_to_graded(const std::vector<Expr>& model);

/// Substitutes expressions for the variables of a polynomial.
Expr polynomial_to_expr(const Polynomial& p, const std::vector<Expr>& arguments);

/// The six coefficients of Phi_x ^ Phi_y in the Engel frame from the model
/// Jacobian (4 x 2) and Phi^1: minors Phi^{ij} recombined with powers of Phi^1.
PVector engel_wedge_closed_form(const Eigen::MatrixXd& model_jacobian, double phi1);

/// Model-coordinate Jacobian and point of a graded-coordinate Engel surface.
Eigen::MatrixXd engel_model_jacobian(const Submanifold& m, std::span<const double> u, Point* model_point = nullptr);

struct Degree3Residual {
  Eigen::Vector3d residuals;   ///< X3^X4, X2^X4 and X1^X4 coefficients
  /// grad Phi^4 + (x^2/2) grad Phi^2 - x grad Phi^3 when Phi^1(x, y) = x; empty otherwise.
  std::optional<Eigen::Vector2d> sufficient_condition;
};

/// Throws PreconditionError unless m is a 2-dimensional Engel surface.
Degree3Residual degree3_system_residual(const Submanifold& m, std::span<const double> u);

struct StrataReport {
  std::map<int, std::vector<std::vector<double>>> strata;   ///< degree -> grid points
  std::vector<std::vector<double>> ambiguous;               ///< near-degenerate points left out
  std::vector<std::vector<double>> mismatches;              ///< disagree with the expected predicate
};

/// Partitions the grid by pointwise degree and compares with `expected` when given.
StrataReport strata_classification(const Submanifold& m, const ParameterGrid& grid, double tolerance = 1e-9,
                                   const std::function<int(std::span<const double>)>& expected = {});

/// Exact degree of the Engel degree-4 parabola at model parameters (x, y).
int deg4_parabola_expected_degree(double x, double y);

/// dPhi(u) du expressed in the left-invariant frame at Phi(u).
Eigen::VectorXd frame_velocity(const Submanifold& m, std::span<const double> u, const Eigen::VectorXd& du);

struct ExpectationOutcome {
  bool passed = false;
  std::string detail;
};

/// Machine-checkable expected fact. basis is "published" (stated in the source
/// example), "derived" (computed from a stated fact) or "identity" (holds by construction).
struct Expectation {
  std::string id;
  std::string subject;
  std::string statement;
  std::string basis;
  /// Nonempty when the printed fact is known to be wrong; names the replacing expectation.
  std::string superseded_by;
  std::function<ExpectationOutcome()> check;
};

struct CatalogEntry {
  std::string name;
  std::shared_ptr<const GroupLaw> law;
  std::vector<Submanifold> submanifolds;
  /// Model-coordinate components for Engel surfaces, keyed by submanifold name.
  std::map<std::string, std::vector<Expr>> model_components;
  std::vector<Expectation> expected;

  const StratifiedAlgebra& algebra() const { return law->algebra(); }
  const Submanifold& submanifold(const std::string& name) const;
};

std::vector<std::string> catalog_names();
/// Throws PreconditionError for unknown names.
const CatalogEntry& catalog_entry(const std::string& name);
const Submanifold& catalog_submanifold(const std::string& entry, const std::string& submanifold);

/// Random polynomial surface (degree <= 3 components with coefficients in eighths)
/// in the group of `law`, reproducible from (seed, index).
/// Blow-up limits known in closed form at points below maximum degree; currently the
/// half-plane {(x1,0,0,x4) : x4 >= 0} at the origin of deg4-parabola.
std::optional<CandidateSet> known_blowup_limit(const std::string& entry, const std::string& submanifold,
                                               std::span<const double> u);

Submanifold random_polynomial_surface(std::shared_ptr<const GroupLaw> law, std::uint64_t seed, std::uint64_t index);

}  // namespace carnot
