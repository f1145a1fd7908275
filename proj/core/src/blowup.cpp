#include "carnot/blowup.hpp"

#include <gsl/gsl_multimin.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "carnot/error.hpp"
#include "carnot/measure.hpp"
#include "carnot/random.hpp"
#include "carnot/rational.hpp"

namespace carnot {

namespace {

constexpr double kPenalty = 1e6;

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Eigen::VectorXd to_vector(std::span<const double> u) {
  return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

std::string format_point(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << ")";
  return out.str();
}

// Minimizes f over R^n starting at x0 with initial simplex steps.
struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& steps, double size_tolerance, std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(x0.size());
  MinimizeResult out{x0, f(x0), false, 0};
  if (n == 0) {
    out.converged = true;
    return out;
  }
  struct Closure {
    const std::function<double(const Eigen::VectorXd&)>* f;
    std::size_t n;
  } closure{&f, n};
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &closure;
  fn.f = [](const gsl_vector* x, void* params) {
    const auto* c = static_cast<const Closure*>(params);
    Eigen::VectorXd v(static_cast<Eigen::Index>(c->n));
    for (std::size_t i = 0; i < c->n; ++i) v[static_cast<Eigen::Index>(i)] = gsl_vector_get(x, i);
    return (*c->f)(v);
  };
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> start(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(start.get(), i, x0[static_cast<Eigen::Index>(i)]);
    gsl_vector_set(step.get(), i, steps[static_cast<Eigen::Index>(i)]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, start.get(), step.get());
  for (; out.iterations < max_iterations; ++out.iterations) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tolerance) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  if (s->fval <= out.value) {
    out.value = s->fval;
    for (std::size_t i = 0; i < n; ++i) out.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i);
  }
  return out;
}

double point_distance(const Point& a, const Point& b, const GroupLaw& law, const HomogeneousNorm& norm,
                      DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) return (a - b).norm();
  return norm(law.relative(a, b));
}

struct Directed {
  double value = 0.0;
  Point witness;
};

Directed directed_distance(const PointCloud& a, const PointCloud& b, const GroupLaw& law, const HomogeneousNorm& norm,
                           const DistanceOptions& options) {
  const bool refine = options.refine && static_cast<bool>(b.chart) && b.chart_coordinates.size() == b.size();
  Eigen::VectorXd steps;
  if (refine) {
    const auto p = b.chart_coordinates.front().size();
    Eigen::VectorXd lo = b.chart_coordinates.front(), hi = lo;
    for (const auto& c : b.chart_coordinates) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    const double spacing = std::pow(static_cast<double>(b.size()), -1.0 / static_cast<double>(p));
    steps = ((hi - lo) * spacing).cwiseMax(1e-12);
  }
  std::vector<double> best(a.size(), 0.0);
  parallel_chunks(a.size(), [&](std::size_t i) {
    const Point& x = a.points[i];
    std::size_t nearest = 0;
    double d = std::numeric_limits<double>::infinity();
    if (options.metric == DistanceMetric::Rho && refine) {
      // Euclidean shortlist, then rho, then refinement on the chart.
      std::vector<std::pair<double, std::size_t>> shortlist;
      shortlist.reserve(b.size());
      for (std::size_t j = 0; j < b.size(); ++j) shortlist.emplace_back((x - b.points[j]).squaredNorm(), j);
      const std::size_t keep = std::min<std::size_t>(16, shortlist.size());
      std::partial_sort(shortlist.begin(), shortlist.begin() + static_cast<std::ptrdiff_t>(keep), shortlist.end());
      for (std::size_t k = 0; k < keep; ++k) {
        const double dk = point_distance(x, b.points[shortlist[k].second], law, norm, options.metric);
        if (dk < d) {
          d = dk;
          nearest = shortlist[k].second;
        }
      }
    } else {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double dj = point_distance(x, b.points[j], law, norm, options.metric);
        if (dj < d) {
          d = dj;
          nearest = j;
        }
      }
    }
    if (refine && d > 0.0) {
      auto objective = [&](const Eigen::VectorXd& c) {
        try {
          const Point y = b.chart(c);
          if (b.admissible && !b.admissible(y)) return kPenalty;
          return point_distance(x, y, law, norm, options.metric);
        } catch (const Error&) {
          return kPenalty;
        }
      };
      const MinimizeResult r = nelder_mead(objective, b.chart_coordinates[nearest], steps, 1e-12, 400);
      d = std::min(d, r.value);
    }
    best[i] = d;
  });
  Directed out;
  out.value = -1.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (best[i] > out.value) {
      out.value = best[i];
      out.witness = a.points[i];
    }
  return out;
}

bool in_candidate(const CandidateSet& set, const Point& v) {
  if (set.span.distance(v) > 1e-10 * (1.0 + v.norm())) return false;
  return !set.contains || set.contains(v);
}

}  // namespace

PointCloud dilated_sample(const Submanifold& m, std::span<const double> u, double r, double R, std::size_t n,
                          const HomogeneousNorm& norm, std::uint64_t seed) {
  if (!(r > 0.0) || !(R > 0.0)) throw PreconditionError("dilated sample needs r > 0 and R > 0");
  if (n == 0) throw PreconditionError("dilated sample needs n > 0");
  const std::size_t p = m.p();
  const GroupLaw& law = m.law();
  const ParameterBox& domain = m.domain();
  const Point base = m.point(u);
  const auto law_ptr = m.law_ptr();
  const Submanifold sub = m;

  PointCloud out;
  out.source = "dilated-manifold";
  out.radius = R;
  out.chart = [sub, base, r, law_ptr](const Eigen::VectorXd& c) {
    return law_ptr->dilate(1.0 / r, law_ptr->relative(base, sub.point(as_span(c))));
  };
  const HomogeneousNorm norm_copy = norm;
  out.admissible = [norm_copy, R](const Point& x) { return norm_copy(x) <= R; };

  BallBox ball = rho_ball_box(m, u, r * R, norm, seed, false);
  std::vector<double> half = ball.half_widths;
  for (int round = 0; round < 6; ++round) {
    ParameterBox box{std::vector<double>(p), std::vector<double>(p)};
    for (std::size_t i = 0; i < p; ++i) {
      box.lower[i] = std::max(domain.lower[i], u[i] - half[i]);
      box.upper[i] = std::min(domain.upper[i], u[i] + half[i]);
    }
    out.points.clear();
    out.chart_coordinates.clear();
    out.attempts = 0;
    out.truncated = false;
    bool near_face = false;
    RandomStream rng(seed, stream_tag::blowup, static_cast<std::uint64_t>(round));
    Eigen::VectorXd c(static_cast<Eigen::Index>(p));
    const std::size_t limit = 400 * n;
    while (out.points.size() < n && out.attempts < limit) {
      ++out.attempts;
      for (std::size_t i = 0; i < p; ++i) c[static_cast<Eigen::Index>(i)] = rng.uniform(box.lower[i], box.upper[i]);
      const Point x = law.dilate(1.0 / r, law.relative(base, m.point(as_span(c))));
      if (norm(x) > R) continue;
      for (std::size_t i = 0; i < p; ++i) {
        const double offset = c[static_cast<Eigen::Index>(i)] - u[i];
        const double edge = offset > 0 ? domain.upper[i] - u[i] : u[i] - domain.lower[i];
        if (half[i] >= edge && std::abs(offset) > 0.8 * edge) out.truncated = true;
        else if (std::abs(offset) > 0.95 * half[i]) near_face = true;
      }
      out.points.push_back(x);
      out.chart_coordinates.push_back(c);
    }
    if (near_face && round + 1 < 6) {
      for (double& h : half) h *= 1.5;
      continue;
    }
    break;
  }
  if (out.points.empty()) throw NumericalError("no sampled point lands in D_R: the base point is isolated at this scale");
  out.undersampled = out.points.size() < n;
  return out;
}

CandidateSet subspace_candidate(const Subspace& span, std::string description) {
  return CandidateSet{std::move(description), span, {}};
}

PointCloud candidate_sample(const CandidateSet& set, const HomogeneousNorm& norm, double R, std::size_t n,
                            std::uint64_t seed) {
  if (!(R > 0.0)) throw PreconditionError("candidate sample needs R > 0");
  if (!norm.calibrated()) throw PreconditionError("candidate sample needs a calibrated norm");
  const Eigen::MatrixXd basis = set.span.basis;
  const auto p = static_cast<std::size_t>(basis.cols());
  const int step = static_cast<int>(norm.epsilons().size());
  Eigen::VectorXd half = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i)
    for (int k = 1; k <= step; ++k)
      half[static_cast<Eigen::Index>(i)] += norm.layer_norm(basis.col(static_cast<Eigen::Index>(i)), k) *
                                            norm.epsilons()[static_cast<std::size_t>(k - 1)] * std::pow(R, k);

  PointCloud out;
  out.source = "subspace";
  out.radius = R;
  out.chart = [basis](const Eigen::VectorXd& c) -> Point { return basis * c; };
  const HomogeneousNorm norm_copy = norm;
  const auto contains = set.contains;
  out.admissible = [norm_copy, R, contains](const Point& x) { return norm_copy(x) <= R && (!contains || contains(x)); };
  RandomStream rng(seed, stream_tag::subgroup, 0x636c6f75ULL);
  Eigen::VectorXd c(static_cast<Eigen::Index>(p));
  while (out.points.size() < n && out.attempts < 1000 * n) {
    ++out.attempts;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-half[i], half[i]);
    const Point x = basis * c;
    if (!out.admissible(x)) continue;
    out.points.push_back(x);
    out.chart_coordinates.push_back(c);
  }
  if (out.points.empty()) throw NumericalError("candidate set has no sampled point in D_R");
  out.undersampled = out.points.size() < n;
  return out;
}

HausdorffDistance hausdorff_distance(const PointCloud& a, const PointCloud& b, const GroupLaw& law,
                                     const HomogeneousNorm& norm, const DistanceOptions& options) {
  if (a.empty() || b.empty()) throw PreconditionError("Hausdorff distance needs nonempty clouds");
  HausdorffDistance out;
  out.forward = out.backward = std::numeric_limits<double>::quiet_NaN();
  out.value = 0.0;
  if (options.direction != Direction::Backward) {
    const Directed d = directed_distance(a, b, law, norm, options);
    out.forward = d.value;
    out.forward_witness = d.witness;
    out.value = std::max(out.value, d.value);
  }
  if (options.direction != Direction::Forward) {
    const Directed d = directed_distance(b, a, law, norm, options);
    out.backward = d.value;
    out.backward_witness = d.witness;
    out.value = std::max(out.value, d.value);
  }
  return out;
}

SubgroupReport subgroup_check(const CandidateSet& set, const GroupLaw& law, std::size_t samples, std::uint64_t seed) {
  const StratifiedAlgebra& algebra = law.algebra();
  const Eigen::MatrixXd& basis = set.span.basis;
  const auto q = static_cast<std::size_t>(basis.rows()), p = static_cast<std::size_t>(basis.cols());
  if (q != algebra.dimension()) throw DimensionError("candidate span has the wrong ambient dimension");
  SubgroupReport out;

  // Bracket closure, exactly when the basis rationalizes.
  std::vector<RationalVector> rational;
  for (std::size_t j = 0; j < p && rational.size() == j; ++j) {
    const Eigen::VectorXd v = basis.col(static_cast<Eigen::Index>(j));
    const double scale = v.cwiseAbs().maxCoeff();
    RationalVector r;
    for (std::size_t i = 0; i < q; ++i) {
      const auto x = rationalize(v[static_cast<Eigen::Index>(i)] / scale, 1000, 1e-9);
      if (!x) break;
      r.push_back(*x);
    }
    if (r.size() == q) rational.push_back(std::move(r));
  }
  if (rational.size() == p) {
    out.exact_bracket_check = true;
    const ClosureReport closure = algebra.subalgebra_closure_check(rational);
    if (!closure.closed) {
      out.bracket_closed = false;
      Point w(static_cast<Eigen::Index>(q));
      for (std::size_t i = 0; i < q; ++i) w[static_cast<Eigen::Index>(i)] = to_double(closure.bracket[i]);
      out.witness = w;
      out.witness_kind = "bracket";
      out.detail = "bracket of spanning vectors " + std::to_string(closure.offending_pair->first + 1) + " and " +
                   std::to_string(closure.offending_pair->second + 1) + " leaves the span";
    }
  } else {
    for (std::size_t i = 0; i < p && out.bracket_closed; ++i)
      for (std::size_t j = i + 1; j < p && out.bracket_closed; ++j) {
        const Eigen::VectorXd b = algebra.bracket(Eigen::VectorXd(basis.col(static_cast<Eigen::Index>(i))),
                                                  Eigen::VectorXd(basis.col(static_cast<Eigen::Index>(j))));
        if (set.span.distance(b) > 1e-10 * (1.0 + b.norm())) {
          out.bracket_closed = false;
          out.witness = b;
          out.witness_kind = "bracket";
          out.detail = "bracket of basis vectors " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                       " leaves the span";
        }
      }
  }

  auto check_pair = [&](const Point& x, const Point& y) {
    if (out.inverse_closed && !in_candidate(set, law.inverse(x))) {
      out.inverse_closed = false;
      if (out.witness_kind.empty()) {
        out.witness = x;
        out.witness_kind = "inverse";
        out.detail = "the inverse " + format_point(law.inverse(x)) + " of " + format_point(x) + " is not in the set";
      }
    }
    const Point xy = law.multiply(x, y);
    if (out.product_closed && !in_candidate(set, xy)) {
      out.product_closed = false;
      if (out.witness_kind.empty()) {
        out.witness = xy;
        out.witness_kind = "product";
        out.detail = "the product " + format_point(xy) + " of " + format_point(x) + " and " + format_point(y) +
                     " is not in the set";
      }
    }
  };

  // Basis directions first, so that simple failures get simple witnesses.
  std::vector<Point> probes;
  for (std::size_t j = 0; j < p; ++j)
    for (double s : {1.0, -1.0}) {
      const Point v = s * basis.col(static_cast<Eigen::Index>(j));
      if (in_candidate(set, v)) probes.push_back(v);
    }
  for (const auto& x : probes)
    for (const auto& y : probes) check_pair(x, y);

  RandomStream rng(seed, stream_tag::subgroup, 0);
  auto draw = [&]() -> std::optional<Point> {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Eigen::VectorXd c(static_cast<Eigen::Index>(p));
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform(-1.0, 1.0);
      const Point v = basis * c;
      if (in_candidate(set, v)) return v;
    }
    return std::nullopt;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = draw(), y = draw();
    if (x && y) check_pair(*x, *y);
  }
  out.is_subgroup = out.bracket_closed && out.product_closed && out.inverse_closed;
  if (out.is_subgroup) out.detail = "closed under brackets, products and inverses";
  return out;
}

SubgroupReport subgroup_check(const Subspace& span, const GroupLaw& law, std::size_t samples, std::uint64_t seed) {
  return subgroup_check(subspace_candidate(span), law, samples, seed);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("slope needs matching samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::infinity();
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw PreconditionError("slope needs at least two distinct abscissae");
  return sxy / sxx;
}

BlowupReport verify_blowup(const Submanifold& m, std::span<const double> u, const std::vector<double>& radii,
                           const HomogeneousNorm& norm, const BlowupOptions& options) {
  if (radii.empty()) throw PreconditionError("blow-up needs radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw PreconditionError("radii must be decreasing");
  BlowupReport out;
  out.point_degree = pointwise_degree(m, u);
  out.reference_degree = submanifold_degree(m, ParameterGrid::uniform(m.domain(), 21)).degree;
  out.maximal = out.point_degree >= out.reference_degree;

  CandidateSet limit;
  if (options.limit) {
    limit = *options.limit;
  } else {
    if (!out.maximal)
      throw PreconditionError("the point is below maximum degree; supply the limit candidate explicitly");
    limit = subspace_candidate(pi_sigma(adapted_frame(m, u)), "Pi_Sigma");
  }
  if (!out.maximal) out.warnings.push_back("point degree is below the maximum; convergence to a subgroup is not expected");
  out.limit_description = limit.description;
  const GroupLaw& law = m.law();
  out.subgroup = subgroup_check(limit, law, options.subgroup_samples, options.seed);
  if (!out.subgroup.is_subgroup) out.warnings.push_back("limit set fails subgroup check: " + out.subgroup.detail);

  const PointCloud target = candidate_sample(limit, norm, options.R, options.n, options.seed);
  std::vector<double> rho, euclid;
  for (double r : radii) {
    const PointCloud cloud = dilated_sample(m, u, r, options.R, options.n, norm, options.seed);
    BlowupRow row;
    row.r = r;
    row.sigma_points = cloud.size();
    row.limit_points = target.size();
    row.undersampled = cloud.undersampled || target.undersampled;
    row.truncated = cloud.truncated;
    DistanceOptions d;
    d.refine = options.refine;
    row.rho = hausdorff_distance(cloud, target, law, norm, d);
    d.metric = DistanceMetric::Euclidean;
    row.euclidean = hausdorff_distance(cloud, target, law, norm, d);
    if (row.undersampled) out.warnings.push_back("undersampled cloud at r = " + std::to_string(r));
    if (row.truncated) out.warnings.push_back("rho-ball reaches the parameter domain at r = " + std::to_string(r));
    rho.push_back(row.rho.value);
    euclid.push_back(row.euclidean.value);
    out.rows.push_back(std::move(row));
  }
  out.rho_slope = loglog_slope(radii, rho);
  out.euclidean_slope = loglog_slope(radii, euclid);
  out.rho_decreasing = true;
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (!(rho[i] < rho[i - 1]) && rho[i] > 0.0) out.rho_decreasing = false;
  return out;
}

CurveSolution integrate_curve(const Submanifold& m, const AdaptedFrame& frame, const Eigen::VectorXd& lambda,
                              double t_max, std::size_t steps) {
  if (!frame.is_maximal()) throw PreconditionError("curve integration needs a frame at a point of maximum degree");
  const std::size_t p = frame.p();
  if (static_cast<std::size_t>(lambda.size()) != p) throw DimensionError("lambda needs one entry per frame column");
  if (!(t_max > 0.0) || steps == 0) throw PreconditionError("curve integration needs t_max > 0 and steps > 0");
  const GroupLaw& law = m.law();
  const Point base = frame.base_point;
  const Eigen::MatrixXd bt = frame.basis_change.transpose();

  CurveSolution out;
  out.lambda = lambda;
  out.layers = law.algebra().degrees();
  auto weights = [&](double t) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j)
      w[static_cast<Eigen::Index>(j)] = lambda[static_cast<Eigen::Index>(j)] * std::pow(t, frame.sigma(j) - 1);
    return w;
  };
  auto velocity = [&](const Eigen::VectorXd& u, double t) -> Eigen::VectorXd {
    FrozenFrame f;
    try {
      f = frozen_frame(m, frame, as_span(u));
    } catch (const PreconditionError&) {
      throw NumericalError("curve left the parameter domain near t = " + std::to_string(t));
    }
    out.min_pivot_ratio = std::min(out.min_pivot_ratio, f.pivot_ratio);
    if (!f.valid())
      throw NumericalError("frozen frame invalid near t = " + std::to_string(t) + " (pivot ratio " +
                           std::to_string(f.pivot_ratio) + ")");
    return f.parameter_map * weights(t);
  };
  auto record = [&](const Eigen::VectorXd& u, double t) {
    Eigen::MatrixXd jac;
    const Point y = m.point(as_span(u), jac);
    const FrozenFrame f = frozen_frame(m, frame, as_span(u));
    const Eigen::VectorXd w = weights(t);
    const Eigen::VectorXd rhs = law.field_matrix(y) * frame.basis_change * f.coefficients * w;
    const double residual = (jac * (f.parameter_map * w) - rhs).norm() / std::max(1.0, rhs.norm());
    out.max_residual = std::max(out.max_residual, residual);
    if (residual > 1e-8) throw NumericalError("tangency residual " + std::to_string(residual) + " at t = " + std::to_string(t));
    out.t_grid.push_back(t);
    out.states.push_back(y);
    out.param_states.emplace_back(u.data(), u.data() + u.size());
    out.adapted.push_back(bt * law.relative(base, y));
  };

  Eigen::VectorXd u = to_vector(frame.base_parameter);
  const double h = t_max / static_cast<double>(steps);
  out.t_grid.reserve(steps + 1);
  record(u, 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = h * static_cast<double>(s);
    const Eigen::VectorXd k1 = velocity(u, t);
    const Eigen::VectorXd k2 = velocity(u + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = velocity(u + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = velocity(u + h * k3, t + h);
    u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    try {
      record(u, h * static_cast<double>(s + 1));
    } catch (const PreconditionError&) {
      throw NumericalError("curve left the parameter domain near t = " + std::to_string(h * static_cast<double>(s + 1)));
    }
  }
  return out;
}

AsymptoticFit extract_G(const CurveSolution& solution, const AdaptedFrame& frame, const std::vector<double>& t_values) {
  if (t_values.size() < 2) throw PreconditionError("extract_G needs at least two t values");
  if (solution.t_grid.size() < 2) throw PreconditionError("extract_G needs an integrated curve");
  const double h = solution.t_grid[1] - solution.t_grid[0];
  std::vector<double> ts = t_values;
  std::sort(ts.begin(), ts.end(), std::greater<>());
  if (std::adjacent_find(ts.begin(), ts.end()) != ts.end()) throw PreconditionError("t values must be distinct");
  std::vector<std::size_t> index;
  for (double t : ts) {
    const double k = std::round(t / h);
    if (!(t > 0.0) || std::abs(k * h - t) > 1e-9 * h || k >= static_cast<double>(solution.t_grid.size()))
      throw PreconditionError("t = " + std::to_string(t) + " is not on the solution grid");
    index.push_back(static_cast<std::size_t>(k));
  }

  const std::size_t p = frame.p();
  const auto q = static_cast<std::size_t>(frame.basis_change.rows());
  AsymptoticFit out;
  out.G = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  out.pivot.assign(q, false);
  out.layers.assign(q, 0);
  if (solution.layers.size() != q) throw DimensionError("solution and frame disagree on the dimension");
  out.layers = solution.layers;
  for (std::size_t j = 0; j < p; ++j) out.pivot[frame.pivot_rows[j]] = true;

  auto coordinate = [&](std::size_t i, std::size_t k) { return solution.adapted[index[k]][static_cast<Eigen::Index>(i)]; };
  std::vector<double> g_row(q, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t i = frame.pivot_rows[j];
    const int s = frame.sigma(j);
    auto scaled = [&](std::size_t k) { return coordinate(i, k) / std::pow(ts[k], s); };
    auto extrapolate = [&](std::size_t a, std::size_t b) { return (ts[a] * scaled(b) - ts[b] * scaled(a)) / (ts[a] - ts[b]); };
    const std::size_t last = ts.size() - 1;
    const double g = extrapolate(last - 1, last);
    if (!std::isfinite(g)) throw NumericalError("extrapolation of G is not finite");
    if (ts.size() >= 3) {
      const double previous = extrapolate(last - 2, last - 1);
      if (std::abs(previous - g) > 10 * ts[last - 2] * (1.0 + std::abs(g)))
        throw NumericalError("extrapolation of G does not converge for frame column " + std::to_string(j + 1));
    }
    out.G[static_cast<Eigen::Index>(j)] = g;
    g_row[i] = g;
  }

  // Pivot rows: |c_i - G t^k|; complementary rows: |c_i|. Values at roundoff
  // level count as exact zeros.
  out.residual_slopes.assign(q, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < q; ++i) {
    const int k = out.layers[i];
    std::vector<double> x, y;
    for (std::size_t n = 0; n < ts.size(); ++n) {
      const double tk = std::pow(ts[n], k);
      const double e = std::abs(coordinate(i, n) - g_row[i] * tk);
      if (e > 1e-12 * tk * (1.0 + std::abs(g_row[i]))) {
        x.push_back(ts[n]);
        y.push_back(e);
      }
    }
    if (x.size() >= 2) out.residual_slopes[i] = loglog_slope(x, y);
  }
  return out;
}

CoverageReport coverage_diagnostic(const Submanifold& m, const AdaptedFrame& frame,
                                   const std::vector<std::vector<double>>& targets, const HomogeneousNorm& norm,
                                   std::size_t steps) {
  if (!frame.is_maximal()) throw PreconditionError("coverage needs a frame at a point of maximum degree");
  const GroupLaw& law = m.law();
  const std::size_t p = frame.p();
  const Eigen::MatrixXd bt = frame.basis_change.transpose();
  CoverageReport out;
  out.rows.resize(targets.size());
  parallel_chunks(targets.size(), [&](std::size_t n) {
    CoverageRow& row = out.rows[n];
    row.target = targets[n];
    const Point z = m.point(targets[n]);
    auto miss = [&](const Eigen::VectorXd& lambda) {
      try {
        return norm(law.relative(integrate_curve(m, frame, lambda, 1.0, steps).states.back(), z));
      } catch (const Error&) {
        return kPenalty;
      }
    };
    // First-order guess from G(lambda) ~ lambda_j / sigma(j).
    const Eigen::VectorXd xi = bt * law.relative(frame.base_point, z);
    Eigen::VectorXd start(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j)
      start[static_cast<Eigen::Index>(j)] = frame.sigma(j) * xi[static_cast<Eigen::Index>(frame.pivot_rows[j])];
    row.lambda = start;
    row.miss = miss(start);
    if (row.miss < 1e-14) {
      row.converged = true;
      return;
    }
    const Eigen::VectorXd step = (0.1 * start.cwiseAbs()).cwiseMax(1e-3 * (start.norm() + 1e-6));
    const MinimizeResult r = nelder_mead(miss, start, step, 1e-12, 800);
    row.lambda = r.x;
    row.miss = r.value;
    row.converged = r.converged && r.value < kPenalty;
    if (!row.converged) row.note = r.value >= kPenalty ? "curve integration failed" : "optimizer did not converge";
  });
  for (const auto& row : out.rows) out.worst_miss = std::max(out.worst_miss, row.miss);
  return out;
}

}  // namespace carnot
