#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

/// One declared bracket [X_i, X_j] += coefficient * X_k (0-based indices).
struct BracketRule {
  std::size_t i;
  std::size_t j;
  std::size_t k;
  Rational coefficient;
};

/// Outcome of StratifiedAlgebra::validate. `axiom` is empty when everything holds.
struct ValidationReport {
  bool ok = true;
  std::string axiom;               ///< "antisymmetry", "jacobi", "grading" or "generation"
  std::vector<std::size_t> where;  ///< 1-based indices of the first violation
  std::string message;
};

struct ClosureReport {
  bool closed = true;
  /// First pair (0-based positions in the spanning list) whose bracket leaves the span.
  std::optional<std::pair<std::size_t, std::size_t>> offending_pair;
  RationalVector bracket;
  RationalVector residual;
};

/// A stratified Lie algebra V_1 + ... + V_s over an adapted basis X_1..X_q,
/// described by exact structure constants [X_i, X_j] = sum_k c_ijk X_k.
class StratifiedAlgebra {
 public:
  StratifiedAlgebra() = default;
  /// Rules may be given in either orientation; the antisymmetric partner is
  /// filled in automatically. A rule with i == j is kept and reported by validate().
  StratifiedAlgebra(std::vector<std::size_t> layer_dims, const std::vector<BracketRule>& rules,
                    std::string name = {});

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return q_; }
  std::size_t step() const { return layer_dims_.size(); }
  const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }
  /// Degree d(j) in 1..step of basis vector j (0-based j).
  int degree_of(std::size_t j) const { return degrees_.at(j); }
  const std::vector<int>& degrees() const { return degrees_; }
  /// First basis index of layer k (1-based layer) and its size.
  std::size_t layer_begin(int k) const;
  std::size_t layer_size(int k) const { return layer_dims_.at(static_cast<std::size_t>(k - 1)); }

  const Rational& structure_constant(std::size_t i, std::size_t j, std::size_t k) const;
  /// Copy with c_ijk set to `value` (and c_jik to -value).
  StratifiedAlgebra with_constant(std::size_t i, std::size_t j, std::size_t k, const Rational& value) const;
  /// Brackets declared by the user, in canonical i < j orientation, nonzero only.
  std::vector<BracketRule> rules() const;

  ValidationReport validate() const;

  RationalVector bracket(const RationalVector& u, const RationalVector& v) const;
  Eigen::VectorXd bracket(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  RationalVector basis_vector(std::size_t j) const;

  /// Q = sum_k k * m_k.
  int homogeneous_dimension() const;

  /// Exact bracket closure of span(spanning); throws PreconditionError if dependent.
  ClosureReport subalgebra_closure_check(const std::vector<RationalVector>& spanning) const;

  /// Structure constants in the new adapted basis Y_a = sum_i columns[a][i] X_i.
  /// Each new vector must lie in one layer, in layer order, and be independent.
  StratifiedAlgebra change_basis(const std::vector<RationalVector>& columns) const;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * q_ + j) * q_ + k; }

  std::string name_;
  std::size_t q_ = 0;
  std::vector<std::size_t> layer_dims_;
  std::vector<int> degrees_;
  std::vector<Rational> c_;
  std::vector<std::pair<std::size_t, std::size_t>> diagonal_rules_;
};

/// Homogeneous dimension of a layer vector without constructing an algebra.
int homogeneous_dimension(const std::vector<std::size_t>& layer_dims);

}  // namespace carnot
