#include "carnot/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "carnot/blowup.hpp"
#include "carnot/catalog.hpp"
#include "carnot/groups.hpp"
#include "carnot/measure.hpp"

namespace carnot::cli {

using json = nlohmann::ordered_json;

namespace {

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json vec(const std::vector<double>& v) { return json(v); }

json matrix_columns(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(vec(Eigen::VectorXd(m.col(j))));
  return out;
}

std::string csv_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + csv_number(values[i]);
  return out + "\n";
}

ParameterBox box_from_pairs(const std::string& key, const std::vector<double>& v) {
  if (v.empty() || v.size() % 2 != 0) throw ConfigError("'" + key + "' expects lower/upper pairs");
  ParameterBox box;
  for (std::size_t i = 0; i < v.size(); i += 2) {
    box.lower.push_back(v[i]);
    box.upper.push_back(v[i + 1]);
  }
  return box;
}

/// Everything a command needs, assembled from the config before any analysis.
class Context {
 public:
  explicit Context(const RunConfig& config) : config_(config) {}

  const RunConfig& config() const { return config_; }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(config_.integer_or("seed", 1)); }

  const StratifiedAlgebra& algebra() {
    if (!algebra_) {
      const std::string group = config_.text("group");
      const auto names = catalog_names();
      if (group == "inline") {
        std::vector<std::size_t> layers;
        for (double d : config_.numbers("group.layers")) {
          if (d < 1 || d != std::floor(d)) throw ConfigError("'group.layers' expects positive integers");
          layers.push_back(static_cast<std::size_t>(d));
        }
        std::vector<BracketRule> rules;
        for (const auto& line : config_.all("group.bracket")) {
          std::istringstream in(line);
          std::size_t i, j, k;
          std::string c;
          in >> i >> j >> k >> c;
          rules.push_back({i - 1, j - 1, k - 1, Rational(c)});
        }
        algebra_ = StratifiedAlgebra(layers, rules, "inline");
      } else if (std::find(names.begin(), names.end(), group) != names.end()) {
        entry_ = &catalog_entry(group);
        algebra_ = entry_->algebra();
        law_ = entry_->law;
      } else {
        algebra_ = builtin_algebra(group);
      }
    }
    return *algebra_;
  }

  const CatalogEntry* entry() {
    algebra();
    return entry_;
  }

  std::shared_ptr<const GroupLaw> law() {
    if (!law_) {
      const ValidationReport v = algebra().validate();
      if (!v.ok) throw PreconditionError("group fails validation: " + v.message);
      law_ = std::make_shared<const GroupLaw>(GroupLaw::compute(algebra()));
    }
    return law_;
  }

  const Submanifold& manifold() {
    if (!manifold_) {
      if (!config_.has("manifold")) throw ConfigError("missing key 'manifold'");
      const std::string name = config_.text("manifold");
      if (!config_.has("manifold.component")) {
        if (!entry()) throw ConfigError("catalog manifold '" + name + "' needs a catalog group");
        manifold_ = entry()->submanifold(name);
        from_catalog_ = true;
      } else {
        std::vector<Expr> components;
        for (const auto& text : config_.all("manifold.component")) components.push_back(parse_expr(text));
        const std::string coordinates = config_.text_or("manifold.coordinates", "graded");
        if (coordinates == "engel-model") {
          if (algebra().name() != "engel4") throw ConfigError("engel-model coordinates need group engel4");
          components = engel_model_to_graded(components);
        } else if (coordinates != "graded") {
          throw ConfigError("'manifold.coordinates' must be graded or engel-model");
        }
        manifold_ = Submanifold(name, law(), config_.words("manifold.parameters"),
                                box_from_pairs("manifold.domain", config_.numbers("manifold.domain")), components);
      }
    }
    return *manifold_;
  }

  std::vector<double> point() {
    const Submanifold& m = manifold();
    std::vector<double> u = config_.numbers_if("point").value_or(std::vector<double>(m.p(), 0.0));
    if (u.size() != m.p()) throw ConfigError("'point' needs " + std::to_string(m.p()) + " values");
    if (!m.domain().contains(u)) throw ConfigError("'point' lies outside the manifold domain");
    return u;
  }

  const HomogeneousNorm& norm() {
    if (!norm_) {
      if (config_.has("epsilons")) {
        norm_ = HomogeneousNorm(algebra(), config_.numbers("epsilons"));
        norm_info_ = {{"epsilons", norm_->epsilons()}, {"source", "config"}};
      } else {
        CalibrationOptions options;
        options.sample_count = static_cast<std::size_t>(config_.integer_or("calibration.samples", 20000));
        options.seed = seed();
        const CalibrationResult c = calibrate_norm(*law(), options);
        norm_ = c.norm;
        norm_info_ = {{"epsilons", norm_->epsilons()},
                      {"source", "calibrated"},
                      {"calibration", {{"samples", c.sample_count}, {"seed", c.seed}, {"worst_ratio", c.worst_ratio}}}};
      }
    }
    return *norm_;
  }

  /// Report skeleton shared by every command.
  json header(const std::string& command) {
    json r;
    r["schema"] = kReportSchema;
    r["command"] = command;
    r["config_hash"] = "fnv1a64:" + config_.hash();
    r["seed"] = seed();
    if (config_.has("group")) {
      const StratifiedAlgebra& a = algebra();
      r["group"] = {{"name", config_.text("group")},
                    {"dimension", a.dimension()},
                    {"layers", a.layer_dims()},
                    {"homogeneous_dimension", a.homogeneous_dimension()}};
    }
    if (manifold_) {
      json components = json::array();
      for (const auto& c : manifold_->components()) components.push_back(print_expr(c));
      r["manifold"] = {{"name", manifold_->name()},
                       {"source", from_catalog_ ? "catalog" : "config"},
                       {"parameters", manifold_->parameters()},
                       {"domain", {{"lower", manifold_->domain().lower}, {"upper", manifold_->domain().upper}}},
                       {"components", components}};
    }
    if (config_.has("group") && algebra().validate().ok) norm();
    r["norm"] = norm_ ? norm_info_ : json(nullptr);
    json provenance = json::array();
    if (manifold_ && from_catalog_ && entry_)
      for (const auto& e : entry_->expected)
        if (e.subject == manifold_->name())
          provenance.push_back({{"id", e.id}, {"basis", e.basis}, {"superseded_by", e.superseded_by}, {"statement", e.statement}});
    r["provenance"] = provenance;
    return r;
  }

 private:
  const RunConfig& config_;
  std::optional<StratifiedAlgebra> algebra_;
  const CatalogEntry* entry_ = nullptr;
  std::shared_ptr<const GroupLaw> law_;
  std::optional<Submanifold> manifold_;
  bool from_catalog_ = false;
  std::optional<HomogeneousNorm> norm_;
  json norm_info_;
};

ParameterGrid config_grid(const RunConfig& c, const Submanifold& m) {
  if (c.has("grid.step")) return ParameterGrid::stepped(m.domain(), c.number("grid.step"));
  const std::int64_t per_axis = c.integer_or("grid", 21);
  if (per_axis < 1) throw ConfigError("'grid' must be positive");
  return ParameterGrid::uniform(m.domain(), static_cast<std::size_t>(per_axis));
}

std::size_t positive(const RunConfig& c, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = c.integer_or(key, fallback);
  if (v < 1) throw ConfigError("'" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

json subgroup_json(const SubgroupReport& s) {
  json out = {{"is_subgroup", s.is_subgroup},
              {"bracket_closed", s.bracket_closed},
              {"exact_bracket_check", s.exact_bracket_check},
              {"product_closed", s.product_closed},
              {"inverse_closed", s.inverse_closed},
              {"witness_kind", s.witness_kind},
              {"detail", s.detail}};
  out["witness"] = s.witness ? vec(*s.witness) : json(nullptr);
  return out;
}

json distance_json(const HausdorffDistance& d) {
  return {{"value", d.value}, {"forward", d.forward}, {"backward", d.backward}};
}

CommandResult validate_group(Context& ctx) {
  CommandResult out;
  const StratifiedAlgebra& a = ctx.algebra();
  const ValidationReport v = a.validate();
  out.report = ctx.header("validate-group");
  out.report["result"] = {{"valid", v.ok}, {"axiom", v.axiom}, {"where", v.where}, {"message", v.message}};
  out.lines.push_back(v.ok ? "group " + ctx.config().text("group") + " is a valid stratified algebra" : v.message);
  out.exit_code = v.ok ? 0 : 1;
  return out;
}

CommandResult bch(Context& ctx) {
  CommandResult out;
  const auto law = ctx.law();
  json product = json::array();
  for (std::size_t i = 0; i < law->algebra().dimension(); ++i) {
    const std::string line = "P" + std::to_string(i + 1) + " = " + law->product_to_string(i);
    product.push_back(law->product_to_string(i));
    out.lines.push_back(line);
  }
  out.report = ctx.header("bch");
  out.report["result"] = {{"product", product}, {"associative", law->is_associative()}};
  return out;
}

CommandResult degree(Context& ctx) {
  CommandResult out;
  const Submanifold& m = ctx.manifold();
  const ParameterGrid grid = config_grid(ctx.config(), m);
  const double tol = ctx.config().number_or("tolerance", 1e-9);
  const DegreeSurvey s = submanifold_degree(m, grid, tol);
  std::map<int, std::size_t> histogram;
  for (int d : s.point_degrees) ++histogram[d];
  json hist = json::object();
  for (const auto& [d, count] : histogram) hist[std::to_string(d)] = count;
  out.report = ctx.header("degree");
  out.report["result"] = {{"degree", s.degree},
                          {"witness", s.witness},
                          {"grid_points", grid.size()},
                          {"near_degenerate_count", s.near_degenerate_count},
                          {"histogram", hist}};
  out.csv = "";
  for (const auto& name : m.parameters()) out.csv += name + ",";
  out.csv += "degree\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row = grid.at(i);
    row.push_back(s.point_degrees[i]);
    out.csv += csv_row(row);
  }
  out.lines.push_back("degree " + std::to_string(s.degree) + " over " + std::to_string(grid.size()) + " grid points");
  return out;
}

CommandResult strata(Context& ctx) {
  CommandResult out;
  const Submanifold& m = ctx.manifold();
  const ParameterGrid grid = config_grid(ctx.config(), m);
  const double tol = ctx.config().number_or("tolerance", 1e-9);
  std::function<int(std::span<const double>)> expected;
  std::string predicate = "none";
  if (ctx.entry() && ctx.entry()->name == "engel4" && m.name() == "deg4-parabola" && !ctx.config().has("manifold.component")) {
    expected = [](std::span<const double> u) { return deg4_parabola_expected_degree(u[0], u[1]); };
    predicate = "deg4-parabola closed-form strata";
  }
  const StrataReport r = strata_classification(m, grid, tol, expected);
  json strata_json = json::object();
  out.csv = "";
  for (const auto& name : m.parameters()) out.csv += name + ",";
  out.csv += "degree\n";
  for (const auto& [d, points] : r.strata) {
    strata_json[std::to_string(d)] = {{"count", points.size()}};
    if (points.size() <= 16) strata_json[std::to_string(d)]["points"] = points;
    for (const auto& p : points) {
      std::vector<double> row = p;
      row.push_back(d);
      out.csv += csv_row(row);
    }
    out.lines.push_back("degree " + std::to_string(d) + ": " + std::to_string(points.size()) + " points");
  }
  out.report = ctx.header("strata");
  out.report["result"] = {{"strata", strata_json},
                          {"ambiguous", r.ambiguous},
                          {"expected_predicate", predicate},
                          {"mismatches", r.mismatches}};
  if (!r.mismatches.empty()) {
    out.exit_code = 1;
    out.lines.push_back(std::to_string(r.mismatches.size()) + " grid points disagree with the expected strata");
  }
  return out;
}

CommandResult measure(Context& ctx) {
  CommandResult out;
  const RunConfig& c = ctx.config();
  const Submanifold& m = ctx.manifold();
  if (!c.has("region") && !c.has("radii")) throw ConfigError("measure needs 'region' and/or 'radii'");
  json result = json::object();
  out.csv = "r,ratio,standard_error,hits,samples,relative_gap\n";
  if (c.has("region")) {
    QuadratureOptions q;
    const std::string method = c.text_or("method", "grid");
    if (method == "monte-carlo") q.method = QuadratureOptions::Method::MonteCarlo;
    else if (method != "grid") throw ConfigError("'method' must be grid or monte-carlo");
    q.nodes = positive(c, "nodes", 64);
    q.samples = positive(c, "samples", 100000);
    q.seed = ctx.seed();
    const MeasureResult r = intrinsic_measure(m, box_from_pairs("region", c.numbers("region")), q);
    result["measure"] = {{"value", r.value}, {"standard_error", r.standard_error}, {"samples", r.sample_count}, {"method", r.method}};
    out.lines.push_back("intrinsic measure " + csv_number(r.value));
  }
  if (c.has("radii")) {
    DensityOptions d;
    d.samples = positive(c, "samples", 1000000);
    d.seed = ctx.seed();
    d.strata_per_axis = positive(c, "strata", 32);
    const std::vector<double> u = ctx.point();
    const DensityLimitReport r =
        verify_density_limit(m, u, c.numbers("radii"), ctx.norm(), d, positive(c, "theta.samples", 1000000));
    json rows = json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const DensityEstimate& e = r.rows[i];
      rows.push_back({{"r", e.radius},
                      {"ratio", e.ratio},
                      {"standard_error", e.standard_error},
                      {"hits", e.hits},
                      {"samples", e.sample_count},
                      {"relative_gap", r.relative_gaps[i]},
                      {"box", {{"lower", e.box.lower}, {"upper", e.box.upper}}}});
      out.csv += csv_row({e.radius, e.ratio, e.standard_error, static_cast<double>(e.hits),
                          static_cast<double>(e.sample_count), r.relative_gaps[i]});
      out.lines.push_back("r=" + csv_number(e.radius) + " ratio=" + csv_number(e.ratio) + " gap=" + csv_number(r.relative_gaps[i]));
    }
    result["density"] = {{"point", u},
                         {"degree", r.degree},
                         {"theta", r.theta},
                         {"theta_standard_error", r.theta_standard_error},
                         {"tau_d_norm", r.tau_d_norm},
                         {"target", r.target},
                         {"rows", rows}};
  }
  out.report = ctx.header("measure");
  out.report["result"] = result;
  return out;
}

CommandResult metric_factor_command(Context& ctx) {
  CommandResult out;
  const RunConfig& c = ctx.config();
  Subspace span;
  std::string source;
  if (c.has("span")) {
    std::vector<Eigen::VectorXd> vectors;
    for (const auto& line : c.all("span")) {
      std::istringstream in(line);
      std::vector<double> v;
      for (double x; in >> x;) v.push_back(x);
      vectors.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    ctx.law();
    span = subspace_from_factors(vectors);
    source = "config span";
  } else {
    span = pi_sigma(adapted_frame(ctx.manifold(), ctx.point()));
    source = "Pi_Sigma";
  }
  const MetricFactor f = metric_factor(span, ctx.norm(), positive(c, "samples", 1000000), ctx.seed());
  out.report = ctx.header("metric-factor");
  out.report["result"] = {{"theta", f.theta},
                          {"standard_error", f.standard_error},
                          {"samples", f.sample_count},
                          {"subspace_source", source},
                          {"basis", matrix_columns(f.subspace.basis)}};
  out.lines.push_back("theta " + csv_number(f.theta) + " +- " + csv_number(f.standard_error));
  return out;
}

CommandResult blowup(Context& ctx) {
  CommandResult out;
  const RunConfig& c = ctx.config();
  const Submanifold& m = ctx.manifold();
  const std::vector<double> u = ctx.point();
  BlowupOptions options;
  options.R = c.number_or("R", 1.0);
  options.n = positive(c, "n", 2000);
  options.seed = ctx.seed();
  options.refine = c.flag_or("refine", true);
  if (ctx.entry() && !c.has("manifold.component")) options.limit = known_blowup_limit(ctx.entry()->name, m.name(), u);
  const BlowupReport r = verify_blowup(m, u, c.numbers("radii"), ctx.norm(), options);
  json rows = json::array();
  out.csv = "r,rho,rho_forward,rho_backward,euclidean,euclidean_forward,euclidean_backward,sigma_points,limit_points\n";
  for (const auto& row : r.rows) {
    rows.push_back({{"r", row.r},
                    {"rho", distance_json(row.rho)},
                    {"euclidean", distance_json(row.euclidean)},
                    {"sigma_points", row.sigma_points},
                    {"limit_points", row.limit_points},
                    {"undersampled", row.undersampled},
                    {"truncated", row.truncated}});
    out.csv += csv_row({row.r, row.rho.value, row.rho.forward, row.rho.backward, row.euclidean.value, row.euclidean.forward,
                        row.euclidean.backward, static_cast<double>(row.sigma_points), static_cast<double>(row.limit_points)});
    out.lines.push_back("r=" + csv_number(row.r) + " rho=" + csv_number(row.rho.value) +
                        " euclidean=" + csv_number(row.euclidean.value));
  }
  out.report = ctx.header("blowup");
  out.report["result"] = {{"point", u},
                          {"point_degree", r.point_degree},
                          {"reference_degree", r.reference_degree},
                          {"maximal", r.maximal},
                          {"limit", r.limit_description},
                          {"R", options.R},
                          {"rows", rows},
                          {"rho_slope", r.rho_slope},
                          {"euclidean_slope", r.euclidean_slope},
                          {"rho_decreasing", r.rho_decreasing},
                          {"subgroup", subgroup_json(r.subgroup)},
                          {"flags", r.warnings}};
  for (const auto& w : r.warnings) out.lines.push_back(w);
  return out;
}

CommandResult curves(Context& ctx) {
  CommandResult out;
  const RunConfig& c = ctx.config();
  const Submanifold& m = ctx.manifold();
  const AdaptedFrame frame = adapted_frame(m, ctx.point());
  const std::vector<double> lambda_values = c.numbers("lambda");
  const Eigen::VectorXd lambda =
      Eigen::Map<const Eigen::VectorXd>(lambda_values.data(), static_cast<Eigen::Index>(lambda_values.size()));
  const double t_max = c.number_or("t_max", 0.1);
  const std::size_t steps = positive(c, "steps", 10000);
  const CurveSolution s = integrate_curve(m, frame, lambda, t_max, steps);

  double first_layer_error = 0.0;
  for (std::size_t j = 0; j < frame.p(); ++j)
    if (frame.sigma(j) == 1)
      for (std::size_t i = 0; i < s.t_grid.size(); ++i)
        first_layer_error = std::max(first_layer_error,
                                     std::abs(s.adapted[i][static_cast<Eigen::Index>(frame.pivot_rows[j])] -
                                              lambda[static_cast<Eigen::Index>(j)] * s.t_grid[i]));

  json result = {{"point", frame.base_parameter},
                 {"alphas", frame.alphas},
                 {"pivot_rows", frame.pivot_rows},
                 {"lambda", lambda_values},
                 {"t_max", t_max},
                 {"steps", steps},
                 {"max_residual", s.max_residual},
                 {"min_pivot_ratio", s.min_pivot_ratio},
                 {"first_layer_error", first_layer_error}};
  std::vector<double> ts;
  if (c.has("t_values")) {
    ts = c.numbers("t_values");
    const AsymptoticFit fit = extract_G(s, frame, ts);
    result["G"] = vec(fit.G);
    result["residual_slopes"] = fit.residual_slopes;
    result["layers"] = fit.layers;
  } else {
    for (int i = 1; i <= 10; ++i) ts.push_back(t_max * i / 10);
  }
  const double h = t_max / static_cast<double>(steps);
  json samples = json::array();
  out.csv = "t";
  for (std::size_t i = 0; i < s.layers.size(); ++i) out.csv += ",c" + std::to_string(i + 1);
  out.csv += "\n";
  for (double t : ts) {
    const auto k = static_cast<std::size_t>(std::llround(t / h));
    if (k >= s.t_grid.size()) throw ConfigError("t value " + csv_number(t) + " exceeds t_max");
    samples.push_back({{"t", s.t_grid[k]}, {"adapted", vec(s.adapted[k])}, {"state", vec(s.states[k])}});
    std::vector<double> row{s.t_grid[k]};
    for (Eigen::Index i = 0; i < s.adapted[k].size(); ++i) row.push_back(s.adapted[k][i]);
    out.csv += csv_row(row);
  }
  result["samples"] = samples;
  out.report = ctx.header("curves");
  out.report["result"] = result;
  out.lines.push_back("first-layer error " + csv_number(first_layer_error) + ", max residual " + csv_number(s.max_residual));
  return out;
}

CommandResult engel_suite(Context& ctx) {
  CommandResult out;
  json rows = json::array();
  std::size_t passed = 0, failed = 0, known = 0;
  for (const auto& name : catalog_names())
    for (const auto& e : catalog_entry(name).expected) {
      const ExpectationOutcome r = e.check();
      std::string status;
      if (e.superseded_by.empty()) {
        status = r.passed ? "pass" : "fail";
        (r.passed ? passed : failed) += 1;
      } else {
        status = r.passed ? "pass" : "known-defect";
        (r.passed ? passed : known) += 1;
      }
      rows.push_back({{"id", e.id},
                      {"entry", name},
                      {"subject", e.subject},
                      {"basis", e.basis},
                      {"superseded_by", e.superseded_by},
                      {"status", status},
                      {"detail", r.detail}});
      std::string line = (status == "pass" ? "PASS " : status == "fail" ? "FAIL " : "KNOWN-DEFECT ") + e.id;
      if (status != "pass") line += ": " + r.detail;
      if (status == "known-defect") line += " (superseded by " + e.superseded_by + ")";
      out.lines.push_back(line);
    }
  out.report = ctx.header("engel-suite");
  out.report["result"] = {{"expectations", rows}, {"passed", passed}, {"failed", failed}, {"known_defects", known}};
  out.exit_code = failed == 0 ? 0 : 1;
  return out;
}

/// Canonical config with catalog groups and manifolds written out inline.
CommandResult export_config(Context& ctx) {
  CommandResult out;
  RunConfig inlined = ctx.config();
  if (inlined.has("group") && inlined.text("group") != "inline") {
    const StratifiedAlgebra& a = ctx.algebra();
    std::string layers;
    for (std::size_t d : a.layer_dims()) layers += (layers.empty() ? "" : " ") + std::to_string(d);
    inlined.set("group", "inline");
    inlined.set("group.layers", layers);
    for (const auto& rule : a.rules())
      inlined.add("group.bracket", std::to_string(rule.i + 1) + " " + std::to_string(rule.j + 1) + " " +
                                       std::to_string(rule.k + 1) + " " + rule.coefficient.get_str());
    if (inlined.has("manifold") && !inlined.has("manifold.component")) {
      const Submanifold& m = ctx.manifold();
      std::string domain;
      for (std::size_t i = 0; i < m.p(); ++i)
        domain += (i ? " " : "") + csv_number(m.domain().lower[i]) + " " + csv_number(m.domain().upper[i]);
      inlined.set("manifold.parameters", [&] {
        std::string words;
        for (const auto& w : m.parameters()) words += (words.empty() ? "" : " ") + w;
        return words;
      }());
      inlined.set("manifold.domain", domain);
      for (const auto& c : m.components()) inlined.add("manifold.component", print_expr(c));
    }
  }
  out.plain = inlined.to_text();
  out.report = ctx.header("export");
  out.report["result"] = {{"config", *out.plain}};
  return out;
}

const std::map<std::string, std::function<CommandResult(Context&)>>& registry() {
  static const std::map<std::string, std::function<CommandResult(Context&)>> commands{
      {"validate-group", validate_group}, {"bch", bch},         {"degree", degree},
      {"strata", strata},                 {"measure", measure}, {"metric-factor", metric_factor_command},
      {"blowup", blowup},                 {"curves", curves},   {"engel-suite", engel_suite},
      {"export", export_config}};
  return commands;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate-group", "bch",    "degree",      "strata", "measure",
                                              "metric-factor",  "blowup", "curves", "engel-suite", "export"};
  return names;
}

CommandResult run_command(const std::string& command, const RunConfig& config) {
  const auto it = registry().find(command);
  if (it == registry().end()) throw ConfigError("unknown command '" + command + "'");
  Context ctx(config);
  return it->second(ctx);
}

int exit_code_for(const Error& error) {
  switch (error.kind()) {
    case ErrorKind::Precondition:
      return 2;
    case ErrorKind::Numerical:
      return 3;
    case ErrorKind::Io:
      return 4;
  }
  return 3;
}

std::string render_report(const nlohmann::ordered_json& report) { return report.dump(2) + "\n"; }

}  // namespace carnot::cli
