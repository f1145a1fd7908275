#include "carnot/catalog.hpp"

#include <Eigen/LU>

#include <cmath>
#include <mutex>
#include <sstream>

#include "carnot/error.hpp"
#include "carnot/groups.hpp"
#include "carnot/random.hpp"

namespace carnot {

namespace {

const std::vector<int> kEngelWeights{1, 1, 2, 3};

Polynomial var(std::size_t j) { return Polynomial::variable(kEngelWeights, j); }
Polynomial cst(const Rational& c) { return Polynomial::constant(kEngelWeights, c); }

bool is_engel(const StratifiedAlgebra& algebra) {
  static const StratifiedAlgebra reference = engel4();
  if (algebra.layer_dims() != reference.layer_dims()) return false;
  const std::size_t q = 4;
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j)
      for (std::size_t k = 0; k < q; ++k)
        if (algebra.structure_constant(i, j, k) != reference.structure_constant(i, j, k)) return false;
  return true;
}

Point evaluate_all(const std::vector<Polynomial>& polys, const Point& x) {
  Point out(static_cast<Eigen::Index>(polys.size()));
  const std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < polys.size(); ++i) out[static_cast<Eigen::Index>(i)] = polys[i].evaluate(pt);
  return out;
}

std::string describe(std::span<const double> u) {
  std::ostringstream out;
  out.precision(6);
  out << "(";
  for (std::size_t i = 0; i < u.size(); ++i) out << (i ? ", " : "") << u[i];
  out << ")";
  return out.str();
}

ExpectationOutcome pass(std::string detail) { return {true, std::move(detail)}; }
ExpectationOutcome fail(std::string detail) { return {false, std::move(detail)}; }

std::shared_ptr<const GroupLaw> shared_law(const StratifiedAlgebra& algebra) {
  return std::make_shared<const GroupLaw>(GroupLaw::compute(algebra));
}

Submanifold engel_surface(const std::string& name, const std::shared_ptr<const GroupLaw>& law,
                          const std::vector<std::string>& model_text, ParameterBox domain,
                          std::map<std::string, std::vector<Expr>>& model_components) {
  std::vector<Expr> model;
  for (const auto& text : model_text) model.push_back(parse_expr(text));
  model_components[name] = model;
  return Submanifold(name, law, {"x", "y"}, std::move(domain), engel_model_to_graded(model));
}

ExpectationOutcome degree_on_grid(const Submanifold& m, std::size_t per_axis, int expected) {
  const ParameterGrid grid = ParameterGrid::uniform(m.domain(), per_axis);
  const DegreeSurvey survey = submanifold_degree(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (survey.point_degrees[i] != expected) {
      std::ostringstream msg;
      msg << "degree " << survey.point_degrees[i] << " at " << describe(grid.at(i));
      return fail(msg.str());
    }
  std::ostringstream msg;
  msg << "degree " << expected << " at all " << grid.size() << " grid points";
  return pass(msg.str());
}

ExpectationOutcome degree_at(const Submanifold& m, const std::vector<std::vector<double>>& points, int expected) {
  for (const auto& u : points) {
    const int d = pointwise_degree(m, u);
    if (d != expected) return fail("degree " + std::to_string(d) + " at " + describe(u));
  }
  return pass("degree " + std::to_string(expected) + " at " + std::to_string(points.size()) + " point(s)");
}

// Largest |generic - closed form| relative to the wedge norm over random points.
ExpectationOutcome closed_form_agreement(const Submanifold& m, std::uint64_t seed, std::size_t count, double tolerance) {
  RandomStream rng(seed, 0x6f726163, 0);
  double worst = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<double> u(m.p());
    for (std::size_t i = 0; i < m.p(); ++i) u[i] = rng.uniform(m.domain().lower[i], m.domain().upper[i]);
    const TangentData t = tangent_pvector(m, u);
    Point model;
    const Eigen::MatrixXd jac = engel_model_jacobian(m, u, &model);
    const PVector oracle = engel_wedge_closed_form(jac, model[0]);
    worst = std::max(worst, (t.wedge + (-1.0) * oracle).norm() / oracle.norm());
  }
  std::ostringstream msg;
  msg << "max relative deviation " << worst << " over " << count << " points";
  return worst <= tolerance ? pass(msg.str()) : fail(msg.str());
}

CatalogEntry build_heisenberg() {
  CatalogEntry e;
  e.name = "heisenberg";
  e.law = shared_law(heisenberg(1));
  e.submanifolds.emplace_back("vertical-plane", e.law, std::vector<std::string>{"x", "y"},
                              ParameterBox{{-1, -1}, {1, 1}},
                              std::vector<Expr>{parse_expr("x"), parse_expr("0"), parse_expr("y")});
  auto law = e.law;
  e.expected.push_back({"heisenberg/law", "group law", "P3 = x3 + y3 + (x1 y2 - x2 y1)/2", "derived", "", [law] {
                          const std::string p3 = law->product_to_string(2);
                          return p3 == "x3 + y3 + 1/2*x1*y2 - 1/2*x2*y1" ? pass(p3) : fail(p3);
                        }});
  const Submanifold plane = e.submanifolds[0];
  e.expected.push_back({"heisenberg/vertical-plane-degree", "vertical-plane", "degree 3 (non-horizontal) everywhere",
                        "derived", "", [plane] { return degree_on_grid(plane, 11, 3); }});
  return e;
}

CatalogEntry build_engel() {
  CatalogEntry e;
  e.name = "engel4";
  e.law = shared_law(engel4());
  const ParameterBox unit{{-1, -1}, {1, 1}};
  e.submanifolds.push_back(engel_surface("trivial-plane", e.law, {"0", "x", "y", "0"}, unit, e.model_components));
  e.submanifolds.push_back(engel_surface("deg3-exp", e.law,
                                         {"x", "x + exp(y)", "x*exp(y) + x^2/2", "x^3/6 + x^2*exp(y)/2"}, unit,
                                         e.model_components));
  e.submanifolds.push_back(engel_surface("deg4-parabola", e.law, {"x", "y", "y^2/2", "y^2/2"},
                                         ParameterBox{{-2, -2}, {4, 4}}, e.model_components));
  e.submanifolds.push_back(engel_surface("deg5-vertical", e.law, {"0", "x", "y", "x + y^2/2"}, unit, e.model_components));
  const Submanifold plane = e.submanifolds[0], deg3 = e.submanifolds[1], deg4 = e.submanifolds[2], deg5 = e.submanifolds[3];

  e.expected.push_back({"trivial-plane/degree", "trivial-plane", "degree 3 everywhere", "published", "",
                        [plane] { return degree_on_grid(plane, 11, 3); }});
  e.expected.push_back({"trivial-plane/tau", "trivial-plane", "tau = X2^X3", "derived", "", [plane] {
                          const ParameterGrid grid = ParameterGrid::uniform(plane.domain(), 7);
                          double worst = 0.0;
                          for (std::size_t i = 0; i < grid.size(); ++i) {
                            const TangentData t = tangent_pvector(plane, grid.at(i));
                            worst = std::max(worst, (t.tau + (-1.0) * PVector::basis(t.tau.degrees(), {1, 2})).norm());
                          }
                          return worst <= 1e-15 ? pass("exact") : fail("deviation " + std::to_string(worst));
                        }});
  e.expected.push_back({"trivial-plane/frame", "trivial-plane", "alpha = (1,1,0) with the X basis unchanged", "published",
                        "", [plane] {
                          const AdaptedFrame f = adapted_frame(plane, std::vector<double>{0.3, -0.2});
                          if (f.alphas != std::vector<std::size_t>{1, 1, 0}) return fail("alphas differ");
                          const Eigen::MatrixXd abs = f.basis_change.cwiseAbs();
                          for (Eigen::Index c = 0; c < abs.cols(); ++c)
                            if (std::abs(abs.col(c).sum() - 1.0) > 1e-15 || std::abs(abs.col(c).maxCoeff() - 1.0) > 1e-15)
                              return fail("adapted basis is not a signed permutation");
                          return pass("alpha = (1,1,0)");
                        }});
  e.expected.push_back({"deg3-exp/degree", "deg3-exp", "degree 3 at every point", "published", "",
                        [deg3] { return degree_on_grid(deg3, 50, 3); }});
  e.expected.push_back({"deg3-exp/system", "deg3-exp", "the three degree-3 conditions and the sufficient gradient condition hold",
                        "published", "", [deg3] {
                          const ParameterGrid grid = ParameterGrid::uniform(deg3.domain(), 9);
                          double worst = 0.0;
                          for (std::size_t i = 0; i < grid.size(); ++i) {
                            const Degree3Residual r = degree3_system_residual(deg3, grid.at(i));
                            worst = std::max(worst, r.residuals.cwiseAbs().maxCoeff());
                            if (!r.sufficient_condition) return fail("first component is not x");
                            worst = std::max(worst, r.sufficient_condition->cwiseAbs().maxCoeff());
                          }
                          std::ostringstream msg;
                          msg << "max residual " << worst;
                          return worst <= 1e-12 ? pass(msg.str()) : fail(msg.str());
                        }});
  auto tau3_check = [deg3](bool as_printed) {
    const ParameterGrid grid = ParameterGrid::uniform(deg3.domain(), 9);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::vector<double> u = grid.at(i);
      const double x = u[0], y = u[1];
      const double target = as_printed ? -std::exp(2 * y) / std::sqrt(std::exp(4 * y) * (1 + x * x + x * x * x * x / 4))
                                       : -std::exp(2 * y) / std::sqrt(std::exp(2 * y) + std::exp(4 * y));
      const double got = tangent_pvector(deg3, u).tau.coefficient({1, 2});
      worst = std::max(worst, std::abs(got - target));
    }
    std::ostringstream msg;
    msg << "max deviation " << worst;
    return worst <= 1e-9 ? pass(msg.str()) : fail(msg.str());
  };
  e.expected.push_back({"deg3-exp/tau3-as-printed", "deg3-exp",
                        "normalized X2^X3 coefficient = -e^{2y}/sqrt(e^{4y}(1 + x^2 + x^4/4))", "published",
                        "deg3-exp/tau3", [tau3_check] { return tau3_check(true); }});
  e.expected.push_back({"deg3-exp/tau3", "deg3-exp",
                        "normalized X2^X3 coefficient = -e^{2y}/sqrt(e^{2y} + e^{4y}), from wedge e^y X1^X2 - e^{2y} X2^X3",
                        "derived", "", [tau3_check] { return tau3_check(false); }});
  e.expected.push_back({"deg3-exp/frame", "deg3-exp", "alpha = (1,1,0) at the origin and Pi = span{X2, X3}", "derived", "",
                        [deg3] {
                          const AdaptedFrame f = adapted_frame(deg3, std::vector<double>{0.0, 0.0});
                          if (f.alphas != std::vector<std::size_t>{1, 1, 0}) return fail("alphas differ");
                          const Subspace pi = pi_sigma(f);
                          const double off = std::max(pi.distance(Eigen::Vector4d(0, 1, 0, 0)), pi.distance(Eigen::Vector4d(0, 0, 1, 0)));
                          return off <= 1e-14 ? pass("alpha = (1,1,0), Pi = span{X2,X3}") : fail("Pi differs");
                        }});
  e.expected.push_back({"deg3-exp/closed-form", "deg3-exp", "generic wedge equals the Engel closed form", "published", "",
                        [deg3] { return closed_form_agreement(deg3, 3, 100, 1e-12); }});
  e.expected.push_back({"deg4-parabola/closed-form", "deg4-parabola",
                        "wedge = X1^X2 + (y-x) X1^X3 + (y - xy + x^2/2) X1^X4", "published", "", [deg4] {
                          auto generic = closed_form_agreement(deg4, 4, 100, 1e-12);
                          if (!generic.passed) return generic;
                          RandomStream rng(4, 0x70617261, 0);
                          for (int n = 0; n < 100; ++n) {
                            const double x = rng.uniform(-2, 4), y = rng.uniform(-2, 4);
                            const PVector w = tangent_pvector(deg4, std::vector<double>{x, y}).wedge;
                            const double expect[6] = {1, y - x, y - x * y + x * x / 2, 0, 0, 0};
                            const IndexTuple tuples[6] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
                            for (int c = 0; c < 6; ++c)
                              if (std::abs(w.coefficient(tuples[c]) - expect[c]) > 1e-12 * std::max(1.0, w.norm()))
                                return fail("coefficient " + std::to_string(c) + " differs at " + describe(std::vector<double>{x, y}));
                          }
                          return pass(generic.detail);
                        }});
  e.expected.push_back({"deg4-parabola/degree4", "deg4-parabola", "degree 4 at (1,1)", "published", "",
                        [deg4] { return degree_at(deg4, {{1, 1}}, 4); }});
  e.expected.push_back({"deg4-parabola/degree2", "deg4-parabola", "degree 2 at (0,0) and (2,2)", "published", "",
                        [deg4] { return degree_at(deg4, {{0, 0}, {2, 2}}, 2); }});
  e.expected.push_back({"deg4-parabola/degree3", "deg4-parabola", "degree 3 at (y + s sqrt(y^2-2y), y) for y = 3, s = -1 and y = -1, s = 1",
                        "published", "", [deg4] {
                          return degree_at(deg4, {{3 - std::sqrt(3.0), 3}, {-1 + std::sqrt(3.0), -1}}, 3);
                        }});
  e.expected.push_back({"deg4-parabola/strata", "deg4-parabola",
                        "0.25-grid on [-2,4]^2 splits into the published strata, with degree 2 only at (0,0) and (2,2)",
                        "published", "", [deg4] {
                          const ParameterGrid grid = ParameterGrid::stepped(deg4.domain(), 0.25);
                          const StrataReport r = strata_classification(deg4, grid, 1e-9, [](std::span<const double> u) {
                            return deg4_parabola_expected_degree(u[0], u[1]);
                          });
                          if (!r.mismatches.empty()) return fail("mismatch at " + describe(r.mismatches.front()));
                          if (!r.ambiguous.empty()) return fail("ambiguous point " + describe(r.ambiguous.front()));
                          const auto it = r.strata.find(2);
                          const std::vector<std::vector<double>> sigma2{{0, 0}, {2, 2}};
                          if (it == r.strata.end() || it->second != sigma2) return fail("degree-2 set differs");
                          std::ostringstream msg;
                          for (const auto& [d, pts] : r.strata) msg << "degree " << d << ": " << pts.size() << " points; ";
                          return pass(msg.str());
                        }});
  e.expected.push_back({"deg4-parabola/curves", "deg4-parabola",
                        "along (y + s sqrt(y^2-2y), y) the X4 frame coefficient vanishes and the X3 one is -s sqrt(y^2-2y)",
                        "published", "", [deg4] {
                          double worst = 0.0;
                          for (double y : {-0.5, -0.25, 2.25, 2.5})
                            for (double s : {-1.0, 1.0}) {
                              const double root = std::sqrt(y * y - 2 * y);
                              const Eigen::Vector2d du(1 + s * (y - 1) / root, 1.0);
                              const Eigen::VectorXd v = frame_velocity(deg4, std::vector<double>{y + s * root, y}, du);
                              worst = std::max({worst, std::abs(v[3]), std::abs(v[2] + s * root)});
                            }
                          std::ostringstream msg;
                          msg << "max deviation " << worst;
                          return worst <= 1e-10 ? pass(msg.str()) : fail(msg.str());
                        }});
  e.expected.push_back({"deg4-parabola/origin-not-maximal", "deg4-parabola",
                        "the origin has degree 2 < 4, so Pi_Sigma is refused there", "published", "", [deg4] {
                          TangentOptions o;
                          o.reference_degree = 4;
                          const AdaptedFrame f = adapted_frame(deg4, std::vector<double>{0, 0}, o);
                          try {
                            pi_sigma(f);
                          } catch (const PreconditionError&) {
                            return pass("refused");
                          }
                          return fail("Pi_Sigma accepted a non-maximal point");
                        }});
  e.expected.push_back({"deg4-parabola/origin-limit", "deg4-parabola",
                        "the blow-up limit at the origin is a half-plane that is not a subgroup", "published", "", [law = e.law] {
                          const auto limit = known_blowup_limit("engel4", "deg4-parabola", std::vector<double>{0, 0});
                          const SubgroupReport r = subgroup_check(*limit, *law);
                          if (r.is_subgroup) return fail("the half-plane passed the subgroup check");
                          if (r.witness_kind != "inverse" || !r.witness->isApprox(Eigen::Vector4d(0, 0, 0, 1)))
                            return fail("unexpected witness: " + r.detail);
                          return pass(r.detail);
                        }});
  e.expected.push_back({"deg4-parabola/frame", "deg4-parabola", "alpha = (1,0,1) at (1,1)", "derived", "", [deg4] {
                          const AdaptedFrame f = adapted_frame(deg4, std::vector<double>{1, 1});
                          return f.alphas == std::vector<std::size_t>{1, 0, 1} ? pass("alpha = (1,0,1)") : fail("alphas differ");
                        }});
  e.expected.push_back({"deg5-vertical/degree", "deg5-vertical", "degree 5 everywhere", "published", "",
                        [deg5] { return degree_on_grid(deg5, 11, 5); }});
  e.expected.push_back({"deg5-vertical/non-horizontal", "deg5-vertical", "no sampled point is horizontal", "published", "",
                        [deg5] {
                          const ParameterGrid grid = ParameterGrid::uniform(deg5.domain(), 11);
                          for (std::size_t i = 0; i < grid.size(); ++i)
                            if (is_horizontal_point(deg5, grid.at(i))) return fail("horizontal at " + describe(grid.at(i)));
                          return pass("non-horizontal at all grid points");
                        }});
  e.expected.push_back({"deg3-exp/horizontal", "deg3-exp", "every sampled point is horizontal (3 < 5)", "published", "",
                        [deg3] {
                          const ParameterGrid grid = ParameterGrid::uniform(deg3.domain(), 11);
                          for (std::size_t i = 0; i < grid.size(); ++i)
                            if (!is_horizontal_point(deg3, grid.at(i))) return fail("non-horizontal at " + describe(grid.at(i)));
                          return pass("horizontal at all grid points");
                        }});
  return e;
}

CatalogEntry build_e5() {
  CatalogEntry e;
  e.name = "e5";
  e.law = shared_law(e5());
  auto law = e.law;
  e.expected.push_back({"e5/homogeneous-dimension", "group", "Q = 11", "published", "", [law] {
                          const int q = law->algebra().homogeneous_dimension();
                          return q == 11 ? pass("Q = 11") : fail("Q = " + std::to_string(q));
                        }});
  e.expected.push_back({"e5/surfaces", "random surfaces", "200 random polynomial surfaces all have degree < 8 and are horizontal",
                        "published", "", [law] {
                          int worst = 0;
                          for (std::uint64_t n = 0; n < 200; ++n) {
                            const Submanifold s = random_polynomial_surface(law, 13, n);
                            const DegreeSurvey d = submanifold_degree(s, ParameterGrid::uniform(s.domain(), 7));
                            worst = std::max(worst, d.degree);
                            if (!is_horizontal_point(s, d.witness)) return fail("surface " + std::to_string(n) + " not horizontal");
                          }
                          return worst < 8 ? pass("max degree " + std::to_string(worst)) : fail("degree " + std::to_string(worst));
                        }});
  return e;
}

}  // namespace

std::vector<Polynomial> engel_model_to_graded() {
  const Rational half(1, 2), twelfth(1, 12);
  return {var(0), var(1), var(2) - half * (var(0) * var(1)),
          var(3) - half * (var(0) * var(2)) + twelfth * (var(0) * var(0) * var(1))};
}

std::vector<Polynomial> engel_graded_to_model() {
  const Rational half(1, 2), sixth(1, 6);
  return {var(0), var(1), var(2) + half * (var(0) * var(1)),
          var(3) + half * (var(0) * var(2)) + sixth * (var(0) * var(0) * var(1))};
}

std::vector<std::vector<Polynomial>> engel_model_fields() {
  const Polynomial zero = cst(0), one = cst(1);
  return {{one, zero, zero, zero},
          {zero, one, var(0), Rational(1, 2) * (var(0) * var(0))},
          {zero, zero, one, var(0)},
          {zero, zero, zero, one}};
}

Point engel_model_to_graded(const Point& x) {
  if (x.size() != 4) throw DimensionError("Engel points have four coordinates");
  static const std::vector<Polynomial> psi = engel_model_to_graded();
  return evaluate_all(psi, x);
}

Point engel_graded_to_model(const Point& y) {
  if (y.size() != 4) throw DimensionError("Engel points have four coordinates");
  static const std::vector<Polynomial> inverse = engel_graded_to_model();
  return evaluate_all(inverse, y);
}

Expr polynomial_to_expr(const Polynomial& p, const std::vector<Expr>& arguments) {
  if (arguments.size() != p.variable_count()) throw DimensionError("one argument per polynomial variable required");
  std::optional<Expr> sum;
  for (const auto& [exps, c] : p.terms()) {
    const Rational magnitude = abs(c);
    std::optional<Expr> term;
    if (magnitude != 1) term = Expr::number(magnitude);
    for (std::size_t j = 0; j < exps.size(); ++j) {
      if (exps[j] == 0) continue;
      const Expr factor = exps[j] == 1 ? arguments[j] : Expr::pow(arguments[j], exps[j]);
      term = term ? *term * factor : factor;
    }
    if (!term) term = Expr::number(magnitude);
    if (!sum) sum = c < 0 ? -*term : *term;
    else sum = c < 0 ? *sum - *term : *sum + *term;
  }
  return sum.value_or(Expr::number(Rational(0)));
}

std::vector<Expr> engel_model_to_graded(const std::vector<Expr>& model) {
  if (model.size() != 4) throw DimensionError("Engel surfaces have four components");
  std::vector<Expr> out;
  for (const Polynomial& p : engel_model_to_graded()) out.push_back(polynomial_to_expr(p, model));
  return out;
}

PVector engel_wedge_closed_form(const Eigen::MatrixXd& model_jacobian, double phi1) {
  if (model_jacobian.rows() != 4 || model_jacobian.cols() != 2) throw DimensionError("Engel closed form needs a 4 x 2 Jacobian");
  auto minor = [&](int i, int j) {
    return model_jacobian(i, 0) * model_jacobian(j, 1) - model_jacobian(i, 1) * model_jacobian(j, 0);
  };
  const double m12 = minor(0, 1), m13 = minor(0, 2), m14 = minor(0, 3), m23 = minor(1, 2), m24 = minor(1, 3),
               m34 = minor(2, 3);
  const double a = phi1, a2 = phi1 * phi1 / 2;
  PVector out(kEngelWeights, 2);
  out.set({0, 1}, m12);
  out.set({0, 2}, m13 - a * m12);
  out.set({0, 3}, m14 - a * m13 + a2 * m12);
  out.set({1, 2}, m23);
  out.set({1, 3}, m24 - a * m23);
  out.set({2, 3}, m34 + a2 * m23 - a * m24);
  return out;
}

Eigen::MatrixXd engel_model_jacobian(const Submanifold& m, std::span<const double> u, Point* model_point) {
  if (!is_engel(m.algebra())) throw PreconditionError("Engel formulas need a submanifold of the Engel group");
  static const std::vector<Polynomial> inverse = engel_graded_to_model();
  static const std::vector<Polynomial> partials = [] {
    std::vector<Polynomial> out;
    for (const Polynomial& p : engel_graded_to_model())
      for (std::size_t j = 0; j < 4; ++j) out.push_back(p.partial_derivative(j));
    return out;
  }();
  Eigen::MatrixXd jac;
  const Point y = m.point(u, jac);
  Eigen::Matrix4d d;
  const std::span<const double> pt(y.data(), 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d(i, j) = partials[static_cast<std::size_t>(4 * i + j)].evaluate(pt);
  if (model_point) *model_point = evaluate_all(inverse, y);
  return d * jac;
}

Degree3Residual degree3_system_residual(const Submanifold& m, std::span<const double> u) {
  if (m.p() != 2) throw PreconditionError("the degree-3 system is stated for surfaces");
  Point model;
  const Eigen::MatrixXd jac = engel_model_jacobian(m, u, &model);
  const PVector w = engel_wedge_closed_form(jac, model[0]);
  Degree3Residual out;
  out.residuals << w.coefficient({2, 3}), w.coefficient({1, 3}), w.coefficient({0, 3});
  const double x = u[0];
  if (std::abs(model[0] - x) <= 1e-14 * std::max(1.0, std::abs(x)) && std::abs(jac(0, 0) - 1.0) <= 1e-14 &&
      std::abs(jac(0, 1)) <= 1e-14) {
    out.sufficient_condition = Eigen::Vector2d(jac.row(3).transpose() + (x * x / 2) * jac.row(1).transpose() -
                                               x * jac.row(2).transpose());
  }
  return out;
}

StrataReport strata_classification(const Submanifold& m, const ParameterGrid& grid, double tolerance,
                                   const std::function<int(std::span<const double>)>& expected) {
  if (grid.size() == 0) throw PreconditionError("strata classification needs a nonempty grid");
  StrataReport out;
  TangentOptions options;
  options.tolerance = tolerance;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::vector<double> u = grid.at(i);
    const TangentData t = tangent_pvector(m, u, options);
    if (t.near_degenerate) {
      out.ambiguous.push_back(u);
      continue;
    }
    out.strata[t.point_degree].push_back(u);
    if (expected && expected(u) != t.point_degree) out.mismatches.push_back(u);
  }
  return out;
}

int deg4_parabola_expected_degree(double x, double y) {
  // X1^X4 coefficient y - xy + x^2/2 vanishes iff (x - y)^2 = y^2 - 2y.
  if ((x - y) * (x - y) != y * y - 2 * y) return 4;
  return x != y ? 3 : 2;
}

Eigen::VectorXd frame_velocity(const Submanifold& m, std::span<const double> u, const Eigen::VectorXd& du) {
  if (static_cast<std::size_t>(du.size()) != m.p()) throw DimensionError("direction must have p entries");
  Eigen::MatrixXd jac;
  const Point x = m.point(u, jac);
  return m.law().field_matrix(x).triangularView<Eigen::UnitLower>().solve(jac * du);
}

const Submanifold& CatalogEntry::submanifold(const std::string& wanted) const {
  for (const auto& s : submanifolds)
    if (s.name() == wanted) return s;
  throw PreconditionError("catalog entry " + name + " has no submanifold " + wanted);
}

std::vector<std::string> catalog_names() { return {"heisenberg", "engel4", "e5"}; }

const CatalogEntry& catalog_entry(const std::string& name) {
  static std::mutex mutex;
  static std::map<std::string, std::unique_ptr<CatalogEntry>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(name);
  if (it != cache.end()) return *it->second;
  CatalogEntry entry;
  if (name == "heisenberg") entry = build_heisenberg();
  else if (name == "engel4") entry = build_engel();
  else if (name == "e5") entry = build_e5();
  else throw PreconditionError("unknown catalog entry '" + name + "'");
  return *cache.emplace(name, std::make_unique<CatalogEntry>(std::move(entry))).first->second;
}

const Submanifold& catalog_submanifold(const std::string& entry, const std::string& submanifold) {
  return catalog_entry(entry).submanifold(submanifold);
}

std::optional<CandidateSet> known_blowup_limit(const std::string& entry, const std::string& submanifold,
                                               std::span<const double> u) {
  if (entry != "engel4" || submanifold != "deg4-parabola" || u.size() != 2 || u[0] != 0.0 || u[1] != 0.0)
    return std::nullopt;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(4, 2);
  basis(0, 0) = 1.0;
  basis(3, 1) = 1.0;
  return CandidateSet{"half-plane {(x1,0,0,x4) : x4 >= 0}", Subspace{basis}, [](const Point& x) { return x[3] >= 0.0; }};
}

Submanifold random_polynomial_surface(std::shared_ptr<const GroupLaw> law, std::uint64_t seed, std::uint64_t index) {
  if (!law) throw PreconditionError("random surface needs a group law");
  const std::size_t q = law->dimension();
  const Expr x = Expr::variable("x"), y = Expr::variable("y");
  for (std::uint64_t attempt = 0;; ++attempt) {
    RandomStream rng(seed, 0x63617461, index * 64 + attempt);
    std::vector<Expr> components;
    for (std::size_t i = 0; i < q; ++i) {
      std::optional<Expr> sum;
      for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b) {
          if (a + b == 0 || rng.uniform() < 0.4) continue;
          const long k = static_cast<long>(rng.next() % 33) - 16;
          if (k == 0) continue;
          Expr term = Expr::number(Rational(k) / 8);
          if (a) term = term * (a == 1 ? x : Expr::pow(x, a));
          if (b) term = term * (b == 1 ? y : Expr::pow(y, b));
          sum = sum ? *sum + term : term;
        }
      components.push_back(sum.value_or(Expr::number(Rational(0))));
    }
    Submanifold s("random-" + std::to_string(index), law, {"x", "y"}, ParameterBox{{-1, -1}, {1, 1}}, std::move(components));
    if (!s.immersion_failure(7, 1e-6)) return s;
    if (attempt == 63) throw NumericalError("no immersed random surface found");
  }
}

}  // namespace carnot
