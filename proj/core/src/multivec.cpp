#include "carnot/multivec.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "carnot/error.hpp"

namespace carnot {

namespace {

void check_tuple(const IndexTuple& j, std::size_t q, std::size_t order) {
  if (j.size() != order) throw DimensionError("index tuple has the wrong length");
  for (std::size_t a = 0; a < j.size(); ++a) {
    if (j[a] >= q) throw DimensionError("index tuple entry out of range");
    if (a > 0 && j[a] <= j[a - 1]) throw PreconditionError("index tuple must be strictly increasing");
  }
}

// Visits every strictly increasing tuple of length p from 0..q-1.
void for_each_tuple(std::size_t q, std::size_t p, const std::function<void(const IndexTuple&)>& f) {
  IndexTuple j(p);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
    if (pos == p) {
      f(j);
      return;
    }
    for (std::size_t i = start; i + (p - pos) <= q; ++i) {
      j[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

PVector::PVector(std::vector<int> degrees, std::size_t order) : degrees_(std::move(degrees)), order_(order) {
  if (order_ > degrees_.size()) throw PreconditionError("p-vector order exceeds the dimension");
}

PVector PVector::basis(std::vector<int> degrees, IndexTuple j) {
  PVector v(std::move(degrees), j.size());
  v.set(j, 1.0);
  return v;
}

PVector PVector::from_vector(std::vector<int> degrees, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != degrees.size()) throw DimensionError("vector length must equal q");
  PVector out(std::move(degrees), 1);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.coefficients_[{static_cast<std::size_t>(i)}] = v[i];
  return out;
}

PVector PVector::wedge_columns(std::vector<int> degrees, const Eigen::MatrixXd& columns) {
  const std::size_t q = degrees.size();
  const auto p = static_cast<std::size_t>(columns.cols());
  if (static_cast<std::size_t>(columns.rows()) != q) throw DimensionError("wedge_columns: rows must equal q");
  PVector out(std::move(degrees), p);
  if (p == 0) {
    out.coefficients_[{}] = 1.0;
    return out;
  }
  Eigen::MatrixXd minor(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for_each_tuple(q, p, [&](const IndexTuple& j) {
    for (std::size_t a = 0; a < p; ++a) minor.row(static_cast<Eigen::Index>(a)) = columns.row(static_cast<Eigen::Index>(j[a]));
    double det;
    if (p == 1) det = minor(0, 0);
    else if (p == 2) det = minor(0, 0) * minor(1, 1) - minor(0, 1) * minor(1, 0);
    else det = minor.partialPivLu().determinant();
    if (det != 0.0) out.coefficients_[j] = det;
  });
  return out;
}

double PVector::coefficient(const IndexTuple& j) const {
  auto it = coefficients_.find(j);
  return it == coefficients_.end() ? 0.0 : it->second;
}

void PVector::set(const IndexTuple& j, double value) {
  check_tuple(j, dimension(), order_);
  if (value == 0.0) coefficients_.erase(j);
  else coefficients_[j] = value;
}

int PVector::degree_of(const IndexTuple& j) const {
  int d = 0;
  for (std::size_t i : j) d += degrees_.at(i);
  return d;
}

PVector& PVector::operator+=(const PVector& other) {
  if (other.degrees_ != degrees_ || other.order_ != order_) throw DimensionError("adding incompatible p-vectors");
  for (const auto& [j, c] : other.coefficients_) {
    const double s = coefficient(j) + c;
    if (s == 0.0) coefficients_.erase(j);
    else coefficients_[j] = s;
  }
  return *this;
}

PVector& PVector::operator*=(double c) {
  if (c == 0.0) coefficients_.clear();
  for (auto& [j, v] : coefficients_) v *= c;
  return *this;
}

PVector PVector::degree_projection(int r) const {
  PVector out(degrees_, order_);
  for (const auto& [j, c] : coefficients_)
    if (degree_of(j) == r) out.coefficients_.emplace(j, c);
  return out;
}

int PVector::degree(double tolerance) const {
  const double total = norm();
  if (total == 0.0) throw PreconditionError("degree of the zero p-vector is undefined");
  std::map<int, double> by_degree;
  for (const auto& [j, c] : coefficients_) by_degree[degree_of(j)] += c * c;
  for (auto it = by_degree.rbegin(); it != by_degree.rend(); ++it)
    if (std::sqrt(it->second) > tolerance * total) return it->first;
  return by_degree.rbegin()->first;  // unreachable for tolerance < 1
}

double PVector::norm() const {
  double s = 0.0;
  for (const auto& [j, c] : coefficients_) s += c * c;
  return std::sqrt(s);
}

std::string PVector::to_string() const {
  if (coefficients_.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [j, c] : coefficients_) {
    if (!first) out << " + ";
    first = false;
    out << c << "*";
    for (std::size_t a = 0; a < j.size(); ++a) out << (a ? "^" : "") << "X" << j[a] + 1;
  }
  return out.str();
}

PVector wedge(const PVector& u, const PVector& v) {
  if (u.degrees() != v.degrees()) throw DimensionError("wedge of p-vectors over different bases");
  if (u.order() + v.order() > u.dimension()) throw PreconditionError("wedge order exceeds the dimension");
  PVector out(u.degrees(), u.order() + v.order());
  for (const auto& [ju, cu] : u.coefficients()) {
    for (const auto& [jv, cv] : v.coefficients()) {
      IndexTuple merged = ju;
      merged.insert(merged.end(), jv.begin(), jv.end());
      // Sign of the permutation that sorts the concatenation; repeated index gives zero.
      int inversions = 0;
      bool repeated = false;
      for (std::size_t a = 0; a < ju.size(); ++a)
        for (std::size_t b = 0; b < jv.size(); ++b) {
          if (ju[a] == jv[b]) repeated = true;
          if (ju[a] > jv[b]) ++inversions;
        }
      if (repeated) continue;
      std::sort(merged.begin(), merged.end());
      const double term = (inversions % 2 ? -1.0 : 1.0) * cu * cv;
      out.set(merged, out.coefficient(merged) + term);
    }
  }
  return out;
}

int max_degree(const std::vector<int>& degrees, std::size_t p) {
  if (p > degrees.size()) throw PreconditionError("max_degree: p exceeds q");
  std::vector<int> d = degrees;
  std::sort(d.begin(), d.end(), std::greater<>());
  int s = 0;
  for (std::size_t i = 0; i < p; ++i) s += d[i];
  return s;
}

double Subspace::distance(const Eigen::VectorXd& v) const { return (v - basis * (basis.transpose() * v)).norm(); }

Subspace subspace_from_factors(const std::vector<Eigen::VectorXd>& vectors, double tolerance) {
  if (vectors.empty()) throw PreconditionError("subspace needs at least one factor");
  const auto q = vectors.front().size();
  Eigen::MatrixXd m(q, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t a = 0; a < vectors.size(); ++a) {
    if (vectors[a].size() != q) throw DimensionError("subspace factors have different lengths");
    m.col(static_cast<Eigen::Index>(a)) = vectors[a];
  }
  // Modified Gram-Schmidt.
  Eigen::MatrixXd basis = m;
  for (Eigen::Index a = 0; a < basis.cols(); ++a) {
    for (Eigen::Index b = 0; b < a; ++b) basis.col(a) -= basis.col(b).dot(basis.col(a)) * basis.col(b);
    const double n = basis.col(a).norm();
    if (n <= tolerance * std::max(1.0, m.col(a).norm()))
      throw PreconditionError("subspace factors are linearly dependent");
    basis.col(a) /= n;
  }
  return Subspace{basis};
}

Subspace pvector_subspace(const PVector& tau, double tolerance) {
  const std::size_t q = tau.dimension(), p = tau.order();
  const double scale = tau.norm();
  if (scale == 0.0) throw PreconditionError("the zero p-vector spans no subspace");
  const auto qi = static_cast<Eigen::Index>(q);
  if (p == q) return Subspace{Eigen::MatrixXd::Identity(qi, qi)};
  std::map<IndexTuple, Eigen::Index> rows;
  std::vector<PVector> images;
  for (std::size_t i = 0; i < q; ++i) {
    images.push_back(wedge(PVector::basis(tau.degrees(), {i}), tau));
    for (const auto& [j, c] : images.back().coefficients()) rows.emplace(j, 0);
  }
  Eigen::Index r = 0;
  for (auto& [j, index] : rows) index = r++;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(r, 1), qi);
  for (std::size_t i = 0; i < q; ++i)
    for (const auto& [j, c] : images[i].coefficients()) m(rows.at(j), static_cast<Eigen::Index>(i)) = c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tolerance * scale) ++rank;
  if (q - rank != p) throw PreconditionError("p-vector is not simple");
  return Subspace{svd.matrixV().rightCols(static_cast<Eigen::Index>(p))};
}

}  // namespace carnot
