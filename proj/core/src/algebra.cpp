#include "carnot/algebra.hpp"

#include <numeric>

#include "carnot/error.hpp"

namespace carnot {

namespace {

std::string idx(std::size_t i) { return std::to_string(i + 1); }

bool is_zero(const RationalVector& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

}  // namespace

int homogeneous_dimension(const std::vector<std::size_t>& layer_dims) {
  int q = 0;
  for (std::size_t k = 0; k < layer_dims.size(); ++k) q += static_cast<int>((k + 1) * layer_dims[k]);
  return q;
}

StratifiedAlgebra::StratifiedAlgebra(std::vector<std::size_t> layer_dims,
                                     const std::vector<BracketRule>& rules, std::string name)
    : name_(std::move(name)), layer_dims_(std::move(layer_dims)) {
  if (layer_dims_.empty()) throw PreconditionError("algebra needs at least one layer");
  for (std::size_t k = 0; k < layer_dims_.size(); ++k) {
    if (layer_dims_[k] == 0) throw PreconditionError("layer " + idx(k) + " is empty");
    for (std::size_t n = 0; n < layer_dims_[k]; ++n) degrees_.push_back(static_cast<int>(k + 1));
  }
  q_ = degrees_.size();
  c_.assign(q_ * q_ * q_, Rational(0));
  for (const auto& r : rules) {
    if (r.i >= q_ || r.j >= q_ || r.k >= q_) throw DimensionError("bracket rule index out of range");
    if (r.i == r.j) {
      if (r.coefficient != 0) diagonal_rules_.emplace_back(r.i, r.k);
      continue;
    }
    c_[index(r.i, r.j, r.k)] += r.coefficient;
    c_[index(r.j, r.i, r.k)] -= r.coefficient;
  }
}

std::size_t StratifiedAlgebra::layer_begin(int k) const {
  return std::accumulate(layer_dims_.begin(), layer_dims_.begin() + (k - 1), std::size_t{0});
}

const Rational& StratifiedAlgebra::structure_constant(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= q_ || j >= q_ || k >= q_) throw DimensionError("structure constant index out of range");
  return c_[index(i, j, k)];
}

StratifiedAlgebra StratifiedAlgebra::with_constant(std::size_t i, std::size_t j, std::size_t k,
                                                   const Rational& value) const {
  if (i >= q_ || j >= q_ || k >= q_) throw DimensionError("structure constant index out of range");
  StratifiedAlgebra copy = *this;
  copy.c_[index(i, j, k)] = value;
  if (i != j) copy.c_[index(j, i, k)] = -value;
  return copy;
}

std::vector<BracketRule> StratifiedAlgebra::rules() const {
  std::vector<BracketRule> out;
  for (std::size_t i = 0; i < q_; ++i)
    for (std::size_t j = i + 1; j < q_; ++j)
      for (std::size_t k = 0; k < q_; ++k)
        if (c_[index(i, j, k)] != 0) out.push_back({i, j, k, c_[index(i, j, k)]});
  return out;
}

ValidationReport StratifiedAlgebra::validate() const {
  auto fail = [](std::string axiom, std::vector<std::size_t> where, std::string msg) {
    return ValidationReport{false, std::move(axiom), std::move(where), std::move(msg)};
  };

  for (const auto& [i, k] : diagonal_rules_)
    return fail("antisymmetry", {i + 1, i + 1, k + 1},
                "antisymmetry violated at (" + idx(i) + "," + idx(i) + "," + idx(k) + "): [X,X] != 0");
  for (std::size_t i = 0; i < q_; ++i)
    for (std::size_t j = 0; j < q_; ++j)
      for (std::size_t k = 0; k < q_; ++k)
        if (c_[index(i, j, k)] != -c_[index(j, i, k)])
          return fail("antisymmetry", {i + 1, j + 1, k + 1},
                      "antisymmetry violated at (" + idx(i) + "," + idx(j) + "," + idx(k) + ")");

  // Jacobi: [[Xi,Xj],Xk] + [[Xj,Xk],Xi] + [[Xk,Xi],Xj] = 0, componentwise in m.
  for (std::size_t i = 0; i < q_; ++i)
    for (std::size_t j = i + 1; j < q_; ++j)
      for (std::size_t k = j + 1; k < q_; ++k)
        for (std::size_t m = 0; m < q_; ++m) {
          Rational s = 0;
          for (std::size_t l = 0; l < q_; ++l) {
            s += c_[index(i, j, l)] * c_[index(l, k, m)];
            s += c_[index(j, k, l)] * c_[index(l, i, m)];
            s += c_[index(k, i, l)] * c_[index(l, j, m)];
          }
          if (s != 0)
            return fail("jacobi", {i + 1, j + 1, k + 1},
                        "Jacobi violated at (" + idx(i) + "," + idx(j) + "," + idx(k) + ")");
        }

  const int s = static_cast<int>(step());
  for (std::size_t i = 0; i < q_; ++i)
    for (std::size_t j = 0; j < q_; ++j)
      for (std::size_t k = 0; k < q_; ++k) {
        if (c_[index(i, j, k)] == 0) continue;
        const int target = degrees_[i] + degrees_[j];
        if (target > s || degrees_[k] != target)
          return fail("grading", {i + 1, j + 1, k + 1},
                      "grading violated at (" + idx(i) + "," + idx(j) + "," + idx(k) + "): [V" +
                          std::to_string(degrees_[i]) + ",V" + std::to_string(degrees_[j]) +
                          "] has a component in V" + std::to_string(degrees_[k]));
      }

  // Generation: brackets of V_1 with V_l must span V_{l+1}.
  for (int l = 1; l < s; ++l) {
    RationalMatrix rows;
    const std::size_t b1 = layer_begin(1), bl = layer_begin(l), bn = layer_begin(l + 1);
    for (std::size_t i = b1; i < b1 + layer_size(1); ++i)
      for (std::size_t j = bl; j < bl + layer_size(l); ++j) {
        RationalVector row;
        for (std::size_t k = bn; k < bn + layer_size(l + 1); ++k) row.push_back(c_[index(i, j, k)]);
        rows.push_back(std::move(row));
      }
    const std::size_t rank = exact_rank(rows);
    if (rank != layer_size(l + 1))
      return fail("generation", {static_cast<std::size_t>(l + 1)},
                  "generation violated: [V1,V" + std::to_string(l) + "] has rank " + std::to_string(rank) +
                      " but V" + std::to_string(l + 1) + " has dimension " +
                      std::to_string(layer_size(l + 1)));
  }
  return {};
}

RationalVector StratifiedAlgebra::bracket(const RationalVector& u, const RationalVector& v) const {
  if (u.size() != q_ || v.size() != q_) throw DimensionError("bracket: vectors must have length q");
  RationalVector out(q_, Rational(0));
  for (std::size_t i = 0; i < q_; ++i) {
    if (u[i] == 0) continue;
    for (std::size_t j = 0; j < q_; ++j) {
      if (v[j] == 0) continue;
      const Rational uv = u[i] * v[j];
      for (std::size_t k = 0; k < q_; ++k)
        if (c_[index(i, j, k)] != 0) out[k] += uv * c_[index(i, j, k)];
    }
  }
  return out;
}

Eigen::VectorXd StratifiedAlgebra::bracket(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(u.size()) != q_ || static_cast<std::size_t>(v.size()) != q_)
    throw DimensionError("bracket: vectors must have length q");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q_));
  for (std::size_t i = 0; i < q_; ++i)
    for (std::size_t j = 0; j < q_; ++j)
      for (std::size_t k = 0; k < q_; ++k)
        if (c_[index(i, j, k)] != 0)
          out[static_cast<Eigen::Index>(k)] += u[static_cast<Eigen::Index>(i)] *
                                               v[static_cast<Eigen::Index>(j)] * c_[index(i, j, k)].get_d();
  return out;
}

RationalVector StratifiedAlgebra::basis_vector(std::size_t j) const {
  if (j >= q_) throw DimensionError("basis index out of range");
  RationalVector e(q_, Rational(0));
  e[j] = 1;
  return e;
}

int StratifiedAlgebra::homogeneous_dimension() const { return carnot::homogeneous_dimension(layer_dims_); }

ClosureReport StratifiedAlgebra::subalgebra_closure_check(const std::vector<RationalVector>& spanning) const {
  for (const auto& v : spanning)
    if (v.size() != q_) throw DimensionError("closure check: vectors must have length q");
  if (exact_rank(spanning) != spanning.size())
    throw PreconditionError("closure check: spanning vectors are linearly dependent");
  for (std::size_t a = 0; a < spanning.size(); ++a)
    for (std::size_t b = a + 1; b < spanning.size(); ++b) {
      RationalVector w = bracket(spanning[a], spanning[b]);
      RationalVector res = exact_residual(spanning, w);
      if (!is_zero(res)) return ClosureReport{false, std::make_pair(a, b), std::move(w), std::move(res)};
    }
  return {};
}

StratifiedAlgebra StratifiedAlgebra::change_basis(const std::vector<RationalVector>& columns) const {
  if (columns.size() != q_) throw DimensionError("change_basis: need q new basis vectors");
  for (std::size_t a = 0; a < q_; ++a) {
    if (columns[a].size() != q_) throw DimensionError("change_basis: vectors must have length q");
    for (std::size_t i = 0; i < q_; ++i)
      if (columns[a][i] != 0 && degrees_[i] != degrees_[a])
        throw PreconditionError("change_basis: new basis vector " + idx(a) + " leaves layer " +
                                std::to_string(degrees_[a]));
  }
  // M has the new vectors as columns; coordinates in the new basis are M^{-1} w.
  RationalMatrix m(q_, RationalVector(q_));
  for (std::size_t a = 0; a < q_; ++a)
    for (std::size_t i = 0; i < q_; ++i) m[i][a] = columns[a][i];
  const RationalMatrix inv = exact_inverse(m);
  std::vector<BracketRule> rules;
  for (std::size_t a = 0; a < q_; ++a)
    for (std::size_t b = a + 1; b < q_; ++b) {
      RationalVector w = bracket(columns[a], columns[b]);
      for (std::size_t k = 0; k < q_; ++k) {
        Rational coef = 0;
        for (std::size_t i = 0; i < q_; ++i) coef += inv[k][i] * w[i];
        if (coef != 0) rules.push_back({a, b, k, coef});
      }
    }
  return StratifiedAlgebra(layer_dims_, rules, name_);
}

}  // namespace carnot
