#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

/// Strictly increasing 0-based index tuple J = (j_1 < ... < j_p).
using IndexTuple = std::vector<std::size_t>;

/// Element of Lambda_p over a graded basis X_1..X_q. The basis p-vectors X_J are
/// orthonormal, and X_J has degree d(J) = d(j_1) + ... + d(j_p).
class PVector {
 public:
  PVector() = default;
  /// Zero p-vector over a basis with the given degrees.
  PVector(std::vector<int> degrees, std::size_t order);

  static PVector basis(std::vector<int> degrees, IndexTuple j);
  /// 1-vector with the given coordinates.
  static PVector from_vector(std::vector<int> degrees, const Eigen::VectorXd& v);
  /// v_1 ^ ... ^ v_p for the columns of a q x p matrix: coefficients are the p x p minors.
  static PVector wedge_columns(std::vector<int> degrees, const Eigen::MatrixXd& columns);

  std::size_t order() const { return order_; }
  std::size_t dimension() const { return degrees_.size(); }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::map<IndexTuple, double>& coefficients() const { return coefficients_; }
  double coefficient(const IndexTuple& j) const;
  void set(const IndexTuple& j, double value);
  int degree_of(const IndexTuple& j) const;

  PVector& operator+=(const PVector& other);
  PVector& operator*=(double c);
  friend PVector operator+(PVector a, const PVector& b) { return a += b; }
  friend PVector operator*(double c, PVector a) { return a *= c; }

  /// (tau)_r: keeps the components with d(J) = r.
  PVector degree_projection(int r) const;
  /// Largest r with |(tau)_r| > tolerance * |tau|; throws PreconditionError on zero.
  int degree(double tolerance = 1e-9) const;
  double norm() const;
  bool is_zero() const { return coefficients_.empty(); }

  /// e.g. "1*X1^X2 + 0.5*X1^X4" with 1-based indices.
  std::string to_string() const;

 private:
  std::vector<int> degrees_;
  std::size_t order_ = 0;
  std::map<IndexTuple, double> coefficients_;
};

/// Antisymmetric product; throws PreconditionError when the orders exceed q.
PVector wedge(const PVector& u, const PVector& v);

/// Largest possible degree of a p-vector: the sum of the p largest degrees.
int max_degree(const std::vector<int>& degrees, std::size_t p);

/// Linear subspace with an orthonormal basis (columns).
struct Subspace {
  Eigen::MatrixXd basis;  ///< q x p, orthonormal columns
  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
  /// Euclidean distance from v to the subspace.
  double distance(const Eigen::VectorXd& v) const;
  /// Coordinates of the orthogonal projection in the orthonormal basis.
  Eigen::VectorXd coordinates(const Eigen::VectorXd& v) const { return basis.transpose() * v; }
};

/// Span of the given vectors, orthonormalized; throws PreconditionError when dependent.
Subspace subspace_from_factors(const std::vector<Eigen::VectorXd>& vectors, double tolerance = 1e-10);

/// {v : v ^ tau = 0} for a simple p-vector tau; throws PreconditionError when tau
/// is zero or the kernel is not p-dimensional.
Subspace pvector_subspace(const PVector& tau, double tolerance = 1e-9);

}  // namespace carnot
