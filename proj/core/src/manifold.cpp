#include "carnot/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "carnot/error.hpp"
#include "carnot/random.hpp"

namespace carnot {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::string format_point(std::span<const double> u) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < u.size(); ++i) out << (i ? ", " : "") << u[i];
  out << ")";
  return out.str();
}

// Frame coefficients T with F(Phi(u)) T = DPhi(u); F is unit lower triangular in graded coordinates.
Eigen::MatrixXd frame_coefficients(const Submanifold& m, std::span<const double> u, Point& point,
                                   Eigen::MatrixXd& jacobian) {
  point = m.point(u, jacobian);
  const Eigen::MatrixXd fields = m.law().field_matrix(point);
  return fields.triangularView<Eigen::UnitLower>().solve(jacobian);
}

double relative_smallest_singular_value(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = a.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<std::size_t> complement_rows(std::size_t q, const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < q; ++i)
    if (std::find(rows.begin(), rows.end(), i) == rows.end()) out.push_back(i);
  return out;
}

}  // namespace

bool ParameterBox::contains(std::span<const double> u) const {
  if (u.size() != dimension()) throw DimensionError("parameter has the wrong dimension");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, upper[i] - lower[i]);
    if (!(u[i] >= lower[i] - slack && u[i] <= upper[i] + slack)) return false;
  }
  return true;
}

bool ParameterBox::contains(const ParameterBox& inner) const {
  if (inner.dimension() != dimension()) throw DimensionError("boxes have different dimensions");
  return contains(inner.lower) && contains(inner.upper);
}

double ParameterBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dimension(); ++i) v *= upper[i] - lower[i];
  return v;
}

ParameterGrid ParameterGrid::uniform(const ParameterBox& box, std::size_t per_axis) {
  if (per_axis == 0) throw PreconditionError("grid needs at least one point per axis");
  ParameterGrid grid;
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    std::vector<double> axis;
    if (per_axis == 1) axis.push_back(0.5 * (box.lower[i] + box.upper[i]));
    else
      for (std::size_t k = 0; k < per_axis; ++k)
        axis.push_back(box.lower[i] + (box.upper[i] - box.lower[i]) * static_cast<double>(k) / static_cast<double>(per_axis - 1));
    grid.axes.push_back(std::move(axis));
  }
  return grid;
}

ParameterGrid ParameterGrid::stepped(const ParameterBox& box, double step) {
  if (!(step > 0.0)) throw PreconditionError("grid step must be positive");
  ParameterGrid grid;
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    const auto n = static_cast<std::size_t>(std::floor((box.upper[i] - box.lower[i]) / step + 1e-9)) + 1;
    std::vector<double> axis(n);
    for (std::size_t k = 0; k < n; ++k) axis[k] = box.lower[i] + static_cast<double>(k) * step;
    grid.axes.push_back(std::move(axis));
  }
  return grid;
}

std::size_t ParameterGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::vector<double> ParameterGrid::at(std::size_t index) const {
  std::vector<double> u(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    u[i] = axes[i][index % axes[i].size()];
    index /= axes[i].size();
  }
  return u;
}

Submanifold::Submanifold(std::string name, std::shared_ptr<const GroupLaw> law, std::vector<std::string> parameters,
                         ParameterBox domain, std::vector<Expr> components)
    : name_(std::move(name)),
      law_(std::move(law)),
      parameters_(std::move(parameters)),
      domain_(std::move(domain)),
      components_(std::move(components)) {
  if (!law_) throw PreconditionError("submanifold needs a group law");
  if (parameters_.empty()) throw PreconditionError("submanifold needs at least one parameter");
  if (components_.size() != law_->dimension())
    throw DimensionError("submanifold needs one component per group coordinate");
  if (parameters_.size() > components_.size()) throw DimensionError("more parameters than group coordinates");
  if (domain_.lower.size() != parameters_.size() || domain_.upper.size() != parameters_.size())
    throw DimensionError("domain box has the wrong dimension");
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (!(domain_.lower[i] < domain_.upper[i])) throw PreconditionError("domain box must have lower < upper");
    for (std::size_t j = 0; j < i; ++j)
      if (parameters_[i] == parameters_[j]) throw PreconditionError("repeated parameter name " + parameters_[i]);
  }
  for (const Expr& c : components_) compiled_.emplace_back(c, parameters_);
}

Point Submanifold::point(std::span<const double> u) const {
  if (!domain_.contains(u)) throw PreconditionError("parameter " + format_point(u) + " lies outside the domain");
  Point x(static_cast<Eigen::Index>(q()));
  for (std::size_t i = 0; i < q(); ++i) x[static_cast<Eigen::Index>(i)] = compiled_[i].evaluate(u);
  return x;
}

Point Submanifold::point(std::span<const double> u, Eigen::MatrixXd& jacobian) const {
  if (!domain_.contains(u)) throw PreconditionError("parameter " + format_point(u) + " lies outside the domain");
  Point x(static_cast<Eigen::Index>(q()));
  jacobian.resize(static_cast<Eigen::Index>(q()), static_cast<Eigen::Index>(p()));
  std::vector<double> grad(p());
  for (std::size_t i = 0; i < q(); ++i) {
    x[static_cast<Eigen::Index>(i)] = compiled_[i].evaluate(u, grad);
    for (std::size_t j = 0; j < p(); ++j) jacobian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = grad[j];
  }
  return x;
}

std::optional<std::vector<double>> Submanifold::immersion_failure(std::size_t per_axis, double tolerance) const {
  const ParameterGrid grid = ParameterGrid::uniform(domain_, per_axis);
  Eigen::MatrixXd jac;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const std::vector<double> u = grid.at(n);
    point(u, jac);
    if (relative_smallest_singular_value(jac) < tolerance) return u;
  }
  return std::nullopt;
}

TangentData tangent_pvector(const Submanifold& m, std::span<const double> u, const TangentOptions& options) {
  TangentData out;
  out.parameter.assign(u.begin(), u.end());
  out.frame_coefficients = frame_coefficients(m, u, out.point, out.jacobian);
  if (relative_smallest_singular_value(out.jacobian) < 1e-12)
    throw PreconditionError("Jacobian of the parametrization is rank deficient at " + format_point(u));

  const std::vector<int>& degrees = m.algebra().degrees();
  out.wedge = PVector::wedge_columns(degrees, out.frame_coefficients);
  const double euclidean = out.wedge.norm();
  if (euclidean == 0.0) throw PreconditionError("tangent p-vector vanishes at " + format_point(u));

  if (options.metric) {
    const Eigen::MatrixXd& g = *options.metric;
    const auto q = static_cast<Eigen::Index>(m.q());
    if (g.rows() != q || g.cols() != q) throw DimensionError("metric must be q x q");
    if (!g.isApprox(g.transpose(), 1e-12) || g.llt().info() != Eigen::Success)
      throw PreconditionError("metric must be symmetric positive definite");
    const Eigen::MatrixXd gram = out.frame_coefficients.transpose() * g * out.frame_coefficients;
    out.area_element = std::sqrt(gram.determinant());
  } else {
    out.area_element = euclidean;
  }
  out.tau = (1.0 / out.area_element) * out.wedge;

  out.point_degree = out.wedge.degree(options.tolerance);
  out.reference_degree = options.reference_degree.value_or(out.point_degree);
  out.tau_d = out.tau.degree_projection(out.reference_degree);
  const double top = out.wedge.degree_projection(out.point_degree).norm() / euclidean;
  out.near_degenerate = top <= 100.0 * options.tolerance;
  return out;
}

int pointwise_degree(const Submanifold& m, std::span<const double> u, double tolerance) {
  TangentOptions options;
  options.tolerance = tolerance;
  return tangent_pvector(m, u, options).point_degree;
}

DegreeSurvey submanifold_degree(const Submanifold& m, const ParameterGrid& grid, double tolerance) {
  const std::size_t n = grid.size();
  if (n == 0) throw PreconditionError("degree survey needs a nonempty grid");
  DegreeSurvey out;
  out.point_degrees.assign(n, 0);
  std::vector<char> near(n, 0);
  constexpr std::size_t chunk = 256;
  parallel_chunks((n + chunk - 1) / chunk, [&](std::size_t c) {
    TangentOptions options;
    options.tolerance = tolerance;
    for (std::size_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
      const TangentData t = tangent_pvector(m, grid.at(i), options);
      out.point_degrees[i] = t.point_degree;
      near[i] = t.near_degenerate;
    }
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.point_degrees[i] > out.point_degrees[best]) best = i;
    out.near_degenerate_count += near[i] ? 1 : 0;
  }
  out.degree = out.point_degrees[best];
  out.witness = grid.at(best);
  return out;
}

bool is_horizontal_point(const Submanifold& m, std::span<const double> u, double tolerance) {
  const int codimension = static_cast<int>(m.q() - m.p());
  return pointwise_degree(m, u, tolerance) < m.algebra().homogeneous_dimension() - codimension;
}

int AdaptedFrame::sigma(std::size_t j) const {
  std::size_t end = 0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    end += alphas[k];
    if (j < end) return static_cast<int>(k + 1);
  }
  throw DimensionError("frame column out of range");
}

AdaptedFrame adapted_frame(const Submanifold& m, std::span<const double> u, const TangentOptions& options) {
  const TangentData tangent = tangent_pvector(m, u, options);
  const StratifiedAlgebra& algebra = m.algebra();
  const std::size_t q = m.q(), p = m.p(), step = algebra.step();
  const Eigen::MatrixXd& t = tangent.frame_coefficients;
  const double threshold = options.tolerance * t.norm();

  AdaptedFrame frame;
  frame.base_parameter.assign(u.begin(), u.end());
  frame.base_point = tangent.point;
  frame.point_degree = tangent.point_degree;
  frame.reference_degree = tangent.reference_degree;
  frame.alphas.assign(step, 0);
  frame.basis_change = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  if (!frame.is_maximal()) {
    std::ostringstream msg;
    msg << "point degree " << frame.point_degree << " is below the reference degree " << frame.reference_degree;
    frame.warnings.push_back(msg.str());
  }

  Eigen::MatrixXd w = t;
  std::vector<std::size_t> remaining(p);
  for (std::size_t i = 0; i < p; ++i) remaining[i] = i;
  std::vector<std::vector<std::size_t>> layer_pivot_rows(step);

  for (int k = static_cast<int>(step); k >= 1; --k) {
    const auto begin = static_cast<Eigen::Index>(algebra.layer_begin(k));
    const auto size = static_cast<Eigen::Index>(algebra.layer_size(k));
    std::vector<Eigen::VectorXd> directions;
    for (;;) {
      std::size_t best = p;
      double best_norm = threshold;
      for (std::size_t c : remaining) {
        const double nrm = w.col(static_cast<Eigen::Index>(c)).segment(begin, size).norm();
        if (nrm > best_norm) {
          best_norm = nrm;
          best = c;
        }
      }
      if (best == p) break;
      const auto b = static_cast<Eigen::Index>(best);
      const Eigen::VectorXd e = w.col(b).segment(begin, size) / best_norm;
      for (std::size_t c : remaining) {
        if (c == best) continue;
        const auto ci = static_cast<Eigen::Index>(c);
        w.col(ci) -= (e.dot(w.col(ci).segment(begin, size)) / best_norm) * w.col(b);
      }
      w.col(b) /= best_norm;
      remaining.erase(std::find(remaining.begin(), remaining.end(), best));
      directions.push_back(e);
    }
    frame.alphas[static_cast<std::size_t>(k - 1)] = directions.size();
    for (std::size_t a = 0; a < directions.size(); ++a)
      layer_pivot_rows[static_cast<std::size_t>(k - 1)].push_back(static_cast<std::size_t>(begin) + a);

    // Complete the selected directions to an orthonormal basis of the layer,
    // preferring the coordinate vectors with the largest residual.
    std::vector<Eigen::VectorXd> basis = directions;
    while (static_cast<Eigen::Index>(basis.size()) < size) {
      Eigen::VectorXd best_v;
      double best_r = -1.0;
      for (Eigen::Index i = 0; i < size; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(size, i);
        for (const auto& e : basis) v -= e.dot(v) * e;
        for (const auto& e : basis) v -= e.dot(v) * e;
        if (v.norm() > best_r + 1e-12) {
          best_r = v.norm();
          best_v = v;
        }
      }
      basis.push_back(best_v / best_r);
    }
    for (Eigen::Index a = 0; a < size; ++a) frame.basis_change.col(begin + a).segment(begin, size) = basis[static_cast<std::size_t>(a)];
  }
  if (!remaining.empty()) throw NumericalError("tangent vectors are dependent after elimination");

  int elimination_degree = 0;
  for (std::size_t k = 0; k < step; ++k) {
    elimination_degree += static_cast<int>(k + 1) * static_cast<int>(frame.alphas[k]);
    for (std::size_t r : layer_pivot_rows[k]) frame.pivot_rows.push_back(r);
  }
  if (elimination_degree != tangent.point_degree) {
    std::ostringstream msg;
    msg << "elimination gives degree " << elimination_degree << " but the tangent p-vector has degree "
        << tangent.point_degree;
    throw NumericalError(msg.str());
  }

  const Eigen::MatrixXd adapted = frame.basis_change.transpose() * t;
  frame.pivot_block = select_rows(adapted, frame.pivot_rows);
  frame.frame_matrix = adapted * frame.pivot_block.inverse();
  return frame;
}

Subspace pi_sigma(const AdaptedFrame& frame) {
  if (!frame.is_maximal()) throw PreconditionError("Pi_Sigma is defined only at points of maximum degree");
  Eigen::MatrixXd basis(frame.basis_change.rows(), static_cast<Eigen::Index>(frame.p()));
  for (std::size_t j = 0; j < frame.p(); ++j)
    basis.col(static_cast<Eigen::Index>(j)) = frame.basis_change.col(static_cast<Eigen::Index>(frame.pivot_rows[j]));
  return Subspace{basis};
}

std::optional<std::vector<RationalVector>> rational_adapted_basis(const AdaptedFrame& frame, const StratifiedAlgebra& algebra) {
  const std::size_t q = algebra.dimension();
  if (static_cast<std::size_t>(frame.basis_change.rows()) != q) throw DimensionError("frame and algebra differ in dimension");
  std::vector<RationalVector> columns;
  for (int k = 1; k <= static_cast<int>(algebra.step()); ++k) {
    const std::size_t begin = algebra.layer_begin(k), size = algebra.layer_size(k);
    RationalMatrix layer;
    for (std::size_t a = 0; a < frame.alphas[static_cast<std::size_t>(k - 1)]; ++a) {
      const Eigen::VectorXd v = frame.basis_change.col(static_cast<Eigen::Index>(begin + a));
      const double scale = v.cwiseAbs().maxCoeff();
      RationalVector col(q, Rational(0));
      for (std::size_t i = begin; i < begin + size; ++i) {
        const auto r = rationalize(v[static_cast<Eigen::Index>(i)] / scale, 1000, 1e-9);
        if (!r) return std::nullopt;
        col[i] = *r;
      }
      layer.push_back(col);
      columns.push_back(col);
    }
    for (std::size_t i = begin; i < begin + size && layer.size() < size; ++i) {
      RationalVector unit(q, Rational(0));
      unit[i] = 1;
      RationalMatrix trial = layer;
      trial.push_back(unit);
      if (exact_rank(trial) == trial.size()) {
        layer.push_back(unit);
        columns.push_back(unit);
      }
    }
  }
  return columns;
}

FrozenFrame frozen_frame(const Submanifold& m, const AdaptedFrame& frame, std::span<const double> u) {
  Point x;
  Eigen::MatrixXd jac;
  const Eigen::MatrixXd adapted = frame.basis_change.transpose() * frame_coefficients(m, u, x, jac);
  const Eigen::MatrixXd block = select_rows(adapted, frame.pivot_rows);
  FrozenFrame out;
  const Eigen::MatrixXd drift = block * frame.pivot_block.inverse();
  const Eigen::VectorXd singular = Eigen::JacobiSVD<Eigen::MatrixXd>(drift).singularValues();
  out.pivot_ratio = singular[singular.size() - 1];
  out.parameter_map = block.inverse();
  out.coefficients = adapted * out.parameter_map;
  return out;
}

LocalGraph local_graph(const Submanifold& m, const AdaptedFrame& frame, double radius, std::size_t per_axis) {
  if (!frame.is_maximal()) throw PreconditionError("local graph needs a point of maximum degree");
  if (!(radius > 0.0)) throw PreconditionError("local graph radius must be positive");
  const std::size_t p = frame.p(), q = m.q();
  const GroupLaw& law = m.law();
  const Point& base = frame.base_point;
  const Eigen::MatrixXd bt = frame.basis_change.transpose();
  const std::vector<std::size_t> others = complement_rows(q, frame.pivot_rows);
  const Eigen::VectorXd u0 = Eigen::Map<const Eigen::VectorXd>(frame.base_parameter.data(), static_cast<Eigen::Index>(p));
  const Eigen::MatrixXd start_map = frame.pivot_block.inverse();

  // Parameter u with pivot coordinates of base^{-1} Phi(u) equal to xi.
  auto solve = [&](const Eigen::VectorXd& xi, Eigen::VectorXd& adapted_point) -> Eigen::VectorXd {
    Eigen::VectorXd v = u0 + start_map * xi;
    Eigen::MatrixXd jac;
    for (int iter = 0; iter < 60; ++iter) {
      const Point y = m.point(as_span(v), jac);
      adapted_point = bt * law.relative(base, y);
      const Eigen::VectorXd residual = select_rows(adapted_point, frame.pivot_rows) - xi;
      if (residual.norm() <= 1e-14 * std::max(1.0, xi.norm())) return v;
      const Eigen::MatrixXd d = select_rows(bt * law.left_translation_jacobian(law.inverse(base), y) * jac, frame.pivot_rows);
      v -= d.partialPivLu().solve(residual);
      if (!m.domain().contains(as_span(v))) throw NumericalError("graph inversion left the parameter domain");
    }
    throw NumericalError("graph inversion did not converge");
  };

  LocalGraph out;
  ParameterBox cube{std::vector<double>(p, -radius), std::vector<double>(p, radius)};
  const ParameterGrid grid = ParameterGrid::uniform(cube, per_axis);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const std::vector<double> g = grid.at(n);
    const Eigen::VectorXd xi = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(p));
    Eigen::VectorXd adapted_point;
    const Eigen::VectorXd v = solve(xi, adapted_point);
    out.xi.push_back(xi);
    out.values.push_back(select_rows(adapted_point, others));
    out.parameters.emplace_back(v.data(), v.data() + v.size());
  }

  const double h = 1e-4 * std::min(1.0, radius);
  out.jacobian_at_origin.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    Eigen::VectorXd plus, minus;
    solve(h * Eigen::VectorXd::Unit(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)), plus);
    solve(-h * Eigen::VectorXd::Unit(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)), minus);
    out.jacobian_at_origin.col(static_cast<Eigen::Index>(j)) = (plus - minus) / (2 * h);
  }
  out.jacobian_error = (out.jacobian_at_origin - frame.frame_matrix).cwiseAbs().maxCoeff();
  if (out.jacobian_error > 1e-6) throw NumericalError("graph Jacobian at the base point differs from the frame matrix");
  return out;
}

}  // namespace carnot
