#include "carnot/measure.hpp"

#include <gsl/gsl_integration.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <memory>

#include "carnot/error.hpp"
#include "carnot/random.hpp"

namespace carnot {

namespace {

int surveyed_degree(const Submanifold& m) {
  return submanifold_degree(m, ParameterGrid::uniform(m.domain(), 21)).degree;
}

void check_region(const Submanifold& m, const ParameterBox& region) {
  if (region.lower.size() != m.p() || region.upper.size() != m.p()) throw DimensionError("region has the wrong dimension");
  for (std::size_t i = 0; i < m.p(); ++i)
    if (!(region.lower[i] <= region.upper[i])) throw PreconditionError("region is empty");
  if (!m.domain().contains(region)) throw PreconditionError("region must lie inside the domain");
}

// Riemannian area element of Phi at u for the metric that makes the X frame orthonormal.
double area_element(const Submanifold& m, std::span<const double> u) {
  Eigen::MatrixXd jac;
  const Point x = m.point(u, jac);
  const Eigen::MatrixXd t = m.law().field_matrix(x).triangularView<Eigen::UnitLower>().solve(jac);
  return std::sqrt(std::max(0.0, (t.transpose() * t).determinant()));
}

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t hits = 0;
};

}  // namespace

double intrinsic_density(const Submanifold& m, std::span<const double> u, int degree,
                         const std::optional<Eigen::MatrixXd>& metric) {
  TangentOptions options;
  options.reference_degree = degree;
  options.metric = metric;
  const TangentData t = tangent_pvector(m, u, options);
  if (!metric) return t.wedge.degree_projection(degree).norm();
  return t.tau_d.norm() * t.area_element;
}

double intrinsic_density(const Submanifold& m, std::span<const double> u) {
  return intrinsic_density(m, u, surveyed_degree(m));
}

MeasureResult intrinsic_measure(const Submanifold& m, const ParameterBox& region, const QuadratureOptions& options) {
  check_region(m, region);
  const int degree = options.degree.value_or(surveyed_degree(m));
  const std::size_t p = m.p();
  MeasureResult out;
  if (region.volume() == 0.0) {
    out.method = options.method == QuadratureOptions::Method::Grid ? "grid" : "monte-carlo";
    return out;
  }
  auto density = [&](std::span<const double> u) { return intrinsic_density(m, u, degree, options.metric); };

  if (options.method == QuadratureOptions::Method::Grid) {
    if (options.nodes == 0) throw PreconditionError("quadrature needs at least one node");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(options.nodes), gsl_integration_glfixed_table_free);
    std::vector<std::vector<double>> nodes(p), weights(p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < options.nodes; ++k) {
        double x, w;
        gsl_integration_glfixed_point(region.lower[i], region.upper[i], k, &x, &w, table.get());
        nodes[i].push_back(x);
        weights[i].push_back(w);
      }
    std::size_t total = 1;
    for (std::size_t i = 0; i < p; ++i) total *= options.nodes;
    const std::size_t per_chunk = options.nodes;
    const std::size_t chunks = total / per_chunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(chunks, [&](std::size_t c) {
      std::vector<double> u(p);
      double s = 0.0;
      for (std::size_t n = c * per_chunk; n < (c + 1) * per_chunk; ++n) {
        std::size_t rest = n;
        double w = 1.0;
        for (std::size_t i = p; i-- > 0;) {
          const std::size_t k = rest % options.nodes;
          rest /= options.nodes;
          u[i] = nodes[i][k];
          w *= weights[i][k];
        }
        s += w * density(u);
      }
      partial[c] = s;
    });
    for (double s : partial) out.value += s;
    out.sample_count = total;
    out.method = "grid";
    return out;
  }

  if (options.samples < 2) throw PreconditionError("Monte Carlo needs at least two samples");
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (options.samples + chunk - 1) / chunk;
  std::vector<Moments> moments(chunks);
  parallel_chunks(chunks, [&](std::size_t c) {
    RandomStream rng(options.seed, stream_tag::measure, c);
    std::vector<double> u(p);
    Moments& mo = moments[c];
    for (std::size_t n = c * chunk; n < std::min(options.samples, (c + 1) * chunk); ++n) {
      for (std::size_t i = 0; i < p; ++i) u[i] = rng.uniform(region.lower[i], region.upper[i]);
      const double f = density(u);
      mo.sum += f;
      mo.sum_sq += f * f;
    }
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& mo : moments) {
    sum += mo.sum;
    sum_sq += mo.sum_sq;
  }
  const auto n = static_cast<double>(options.samples);
  const double mean = sum / n;
  const double variance = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1));
  out.value = region.volume() * mean;
  out.standard_error = region.volume() * std::sqrt(variance / n);
  out.sample_count = options.samples;
  out.method = "monte-carlo";
  return out;
}

MetricFactor metric_factor(const Subspace& subspace, const HomogeneousNorm& norm, std::size_t sample_count,
                           std::uint64_t seed) {
  if (!norm.calibrated()) throw PreconditionError("metric factor needs a calibrated norm");
  if (sample_count == 0) throw PreconditionError("metric factor needs samples");
  const Eigen::MatrixXd& basis = subspace.basis;
  const auto p = static_cast<std::size_t>(basis.cols());
  if (p == 0) throw PreconditionError("metric factor needs a nonzero subspace");
  if (!(basis.transpose() * basis).isIdentity(1e-10)) throw PreconditionError("subspace basis must be orthonormal");

  const int step = static_cast<int>(norm.epsilons().size());
  std::vector<double> half(p, 0.0);
  double volume = 1.0;
  for (std::size_t i = 0; i < p; ++i) {
    const Eigen::VectorXd b = basis.col(static_cast<Eigen::Index>(i));
    for (int k = 1; k <= step; ++k) half[i] += norm.layer_norm(b, k) * norm.epsilons()[static_cast<std::size_t>(k - 1)];
    volume *= 2 * half[i];
  }

  constexpr std::size_t chunk = 65536;
  const std::size_t chunks = (sample_count + chunk - 1) / chunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_chunks(chunks, [&](std::size_t c) {
    RandomStream rng(seed, stream_tag::metric_factor, c);
    Eigen::VectorXd coords(static_cast<Eigen::Index>(p));
    for (std::size_t n = c * chunk; n < std::min(sample_count, (c + 1) * chunk); ++n) {
      for (std::size_t i = 0; i < p; ++i) coords[static_cast<Eigen::Index>(i)] = rng.uniform(-half[i], half[i]);
      if (norm(basis * coords) < 1.0) ++hits[c];
    }
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  const double f = static_cast<double>(total) / static_cast<double>(sample_count);
  MetricFactor out;
  out.theta = volume * f;
  out.standard_error = volume * std::sqrt(f * (1 - f) / static_cast<double>(sample_count));
  out.sample_count = sample_count;
  out.subspace = subspace;
  out.epsilons = norm.epsilons();
  return out;
}

MetricFactor metric_factor(const PVector& tau_d, const HomogeneousNorm& norm, std::size_t sample_count, std::uint64_t seed) {
  return metric_factor(pvector_subspace(tau_d), norm, sample_count, seed);
}

BallBox rho_ball_box(const Submanifold& m, std::span<const double> u, double r, const HomogeneousNorm& norm,
                     std::uint64_t seed, bool refuse_truncation) {
  if (!(r > 0.0)) throw PreconditionError("ball radius must be positive");
  if (!norm.calibrated()) throw PreconditionError("ball search needs a calibrated norm");
  const std::size_t p = m.p();
  const Point base = m.point(u);
  const GroupLaw& law = m.law();
  const ParameterBox& domain = m.domain();
  auto inside = [&](std::span<const double> v) { return norm(law.relative(base, m.point(v))) < r; };

  // The rho-ball pulled back to parameters is thin and anisotropic, so its
  // bounding box is found by pilot sampling that grows faces the hits touch.
  BallBox out;
  std::vector<double>& half = out.half_widths;
  half.assign(p, r);
  auto clamp_box = [&] {
    ParameterBox box{std::vector<double>(p), std::vector<double>(p)};
    for (std::size_t i = 0; i < p; ++i) {
      box.lower[i] = std::max(domain.lower[i], u[i] - half[i]);
      box.upper[i] = std::min(domain.upper[i], u[i] + half[i]);
    }
    return box;
  };
  auto truncated = [&](std::size_t i, double offset) {
    const double edge = offset > 0 ? domain.upper[i] - u[i] : u[i] - domain.lower[i];
    return half[i] >= edge && std::abs(offset) > 0.8 * edge;
  };

  for (int round = 0; round < 80; ++round) {
    const ParameterBox box = clamp_box();
    RandomStream rng(seed, stream_tag::density ^ 0x70696c6fULL, static_cast<std::uint64_t>(round));
    std::vector<double> extent(p, 0.0);
    std::vector<bool> touching(p, false);
    std::size_t hits = 0;
    std::vector<double> v(p);
    for (int n = 0; n < 4096; ++n) {
      for (std::size_t i = 0; i < p; ++i) v[i] = rng.uniform(box.lower[i], box.upper[i]);
      if (!inside(v)) continue;
      ++hits;
      for (std::size_t i = 0; i < p; ++i) {
        const double offset = v[i] - u[i];
        extent[i] = std::max(extent[i], std::abs(offset));
        if (truncated(i, offset)) {
          if (refuse_truncation)
            throw PreconditionError("radius too large for the domain: the rho-ball reaches the parameter boundary");
          out.truncated = true;
        } else if (std::abs(offset) > 0.8 * half[i]) {
          touching[i] = true;
        }
      }
    }
    out.pilot_rounds = static_cast<std::size_t>(round) + 1;
    if (std::find(touching.begin(), touching.end(), true) != touching.end()) {
      for (std::size_t i = 0; i < p; ++i)
        if (touching[i]) half[i] *= 2;
      out.truncated = false;
    } else if (hits < 64) {
      for (std::size_t i = 0; i < p; ++i) half[i] = hits > 1 ? std::max(1.5 * extent[i], half[i] / 8) : half[i] / 4;
      out.truncated = false;
    } else {
      for (std::size_t i = 0; i < p; ++i) half[i] = std::min(half[i], 1.3 * extent[i] / 0.8);
      out.box = clamp_box();
      return out;
    }
  }
  throw NumericalError("could not bound the rho-ball in parameter space");
}

DensityEstimate density_ratio(const Submanifold& m, std::span<const double> u, double r, const HomogeneousNorm& norm,
                              const DensityOptions& options) {
  if (!(r > 0.0)) throw PreconditionError("density radius must be positive");
  if (!norm.calibrated()) throw PreconditionError("density ratio needs a calibrated norm");
  if (options.samples < 16) throw PreconditionError("density ratio needs samples");
  const std::size_t p = m.p();
  const int degree = options.degree.value_or(pointwise_degree(m, u));
  const Point base = m.point(u);
  const GroupLaw& law = m.law();
  const ParameterBox& domain = m.domain();
  auto inside = [&](std::span<const double> v) { return norm(law.relative(base, m.point(v))) < r; };
  std::vector<double> half = rho_ball_box(m, u, r, norm, options.seed, true).half_widths;
  auto clamp_box = [&](const std::vector<double>& h) {
    ParameterBox box{std::vector<double>(p), std::vector<double>(p)};
    for (std::size_t i = 0; i < p; ++i) {
      box.lower[i] = std::max(domain.lower[i], u[i] - h[i]);
      box.upper[i] = std::min(domain.upper[i], u[i] + h[i]);
    }
    return box;
  };
  auto truncated = [&](std::size_t i, double offset) {
    const double edge = offset > 0 ? domain.upper[i] - u[i] : u[i] - domain.lower[i];
    return half[i] >= edge && std::abs(offset) > 0.8 * edge;
  };
  const std::string refusal = "radius too large for the domain: the rho-ball reaches the parameter boundary";

  std::size_t per_axis = std::max<std::size_t>(1, options.strata_per_axis);
  while (per_axis > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(p)) > 4096.0) per_axis /= 2;
  std::size_t strata = 1;
  for (std::size_t i = 0; i < p; ++i) strata *= per_axis;
  const std::size_t per_stratum = std::max<std::size_t>(2, options.samples / strata);

  for (int attempt = 0; attempt < 6; ++attempt) {
    const ParameterBox box = clamp_box(half);
    std::vector<double> cell(p);
    double cell_volume = 1.0;
    for (std::size_t i = 0; i < p; ++i) {
      cell[i] = (box.upper[i] - box.lower[i]) / static_cast<double>(per_axis);
      cell_volume *= cell[i];
    }
    std::vector<double> integral(strata, 0.0), variance(strata, 0.0);
    std::vector<std::size_t> hits(strata, 0);
    std::vector<char> near_face(strata, 0);
    parallel_chunks(strata, [&](std::size_t s) {
      RandomStream rng(options.seed, stream_tag::density, s);
      std::vector<double> lo(p), v(p);
      std::size_t rest = s;
      for (std::size_t i = p; i-- > 0;) {
        lo[i] = box.lower[i] + static_cast<double>(rest % per_axis) * cell[i];
        rest /= per_axis;
      }
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t n = 0; n < per_stratum; ++n) {
        for (std::size_t i = 0; i < p; ++i) v[i] = lo[i] + cell[i] * rng.uniform();
        if (!inside(v)) continue;
        ++hits[s];
        for (std::size_t i = 0; i < p; ++i) {
          if (truncated(i, v[i] - u[i])) near_face[s] = 2;
          else if (std::abs(v[i] - u[i]) > 0.9 * half[i]) near_face[s] = std::max<char>(near_face[s], 1);
        }
        const double f = area_element(m, v);
        sum += f;
        sum_sq += f * f;
      }
      const auto n = static_cast<double>(per_stratum);
      const double mean = sum / n;
      integral[s] = cell_volume * mean;
      variance[s] = cell_volume * cell_volume * std::max(0.0, (sum_sq / n - mean * mean)) / (n - 1);
    });
    if (std::find(near_face.begin(), near_face.end(), 2) != near_face.end()) throw PreconditionError(refusal);
    if (std::find(near_face.begin(), near_face.end(), 1) != near_face.end()) {
      for (double& h : half) h *= 1.5;
      continue;
    }
    DensityEstimate out;
    out.radius = r;
    out.box = box;
    out.sample_count = strata * per_stratum;
    double total = 0.0, var = 0.0;
    for (std::size_t s = 0; s < strata; ++s) {
      total += integral[s];
      var += variance[s];
      out.hits += hits[s];
    }
    const double scale = std::pow(r, degree);
    out.ratio = total / scale;
    out.standard_error = std::sqrt(var) / scale;
    return out;
  }
  throw NumericalError("rho-ball support kept reaching the sampling box");
}

DensityLimitReport verify_density_limit(const Submanifold& m, std::span<const double> u, const std::vector<double>& radii,
                                        const HomogeneousNorm& norm, const DensityOptions& options,
                                        std::size_t theta_samples) {
  if (radii.empty()) throw PreconditionError("density limit needs radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw PreconditionError("radii must be decreasing");
  TangentOptions topt;
  topt.reference_degree = options.degree;
  const AdaptedFrame frame = adapted_frame(m, u, topt);
  const TangentData tangent = tangent_pvector(m, u, topt);
  DensityLimitReport out;
  out.degree = tangent.reference_degree;
  const MetricFactor theta = metric_factor(pi_sigma(frame), norm, theta_samples, options.seed);
  out.theta = theta.theta;
  out.theta_standard_error = theta.standard_error;
  out.tau_d_norm = tangent.tau_d.norm();
  out.target = out.theta / out.tau_d_norm;
  DensityOptions dopt = options;
  dopt.degree = out.degree;
  for (double r : radii) {
    out.rows.push_back(density_ratio(m, u, r, norm, dopt));
    out.relative_gaps.push_back(std::abs(out.rows.back().ratio - out.target) / out.target);
  }
  return out;
}

}  // namespace carnot
