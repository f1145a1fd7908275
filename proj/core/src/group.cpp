#include "carnot/group.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "carnot/error.hpp"
#include "carnot/random.hpp"

namespace carnot {

namespace {

using PolyVector = std::vector<Polynomial>;

PolyVector zero_vector(const std::vector<int>& weights, std::size_t q) {
  return PolyVector(q, Polynomial(weights));
}

// [U, V]_k = sum_{i,j} c_ijk U_i V_j with polynomial coefficients.
PolyVector bracket(const StratifiedAlgebra& a, const PolyVector& u, const PolyVector& v) {
  const std::size_t q = a.dimension();
  PolyVector out = zero_vector(u.front().weights(), q);
  for (std::size_t i = 0; i < q; ++i) {
    if (u[i].is_zero()) continue;
    for (std::size_t j = 0; j < q; ++j) {
      if (v[j].is_zero()) continue;
      Polynomial prod;
      bool have_prod = false;
      for (std::size_t k = 0; k < q; ++k) {
        const Rational& c = a.structure_constant(i, j, k);
        if (c == 0) continue;
        if (!have_prod) {
          prod = u[i] * v[j];
          have_prod = true;
        }
        out[k] += c * prod;
      }
    }
  }
  return out;
}

Rational factorial(unsigned n) {
  Rational f(1);
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

// Right-nested commutator [w1,[w2,[...,wm]]] of a word over {X, Y}, memoized by word.
class NestedCommutators {
 public:
  NestedCommutators(const StratifiedAlgebra& a, PolyVector x, PolyVector y)
      : algebra_(a), x_(std::move(x)), y_(std::move(y)) {}

  const PolyVector& get(const std::string& word) {
    auto it = memo_.find(word);
    if (it != memo_.end()) return it->second;
    PolyVector value;
    if (word.size() == 1) {
      value = word[0] == 'X' ? x_ : y_;
    } else {
      const PolyVector& head = word[0] == 'X' ? x_ : y_;
      value = bracket(algebra_, head, get(word.substr(1)));
    }
    return memo_.emplace(word, std::move(value)).first->second;
  }

 private:
  const StratifiedAlgebra& algebra_;
  PolyVector x_, y_;
  std::map<std::string, PolyVector> memo_;
};

// Enumerates multi-indices (a_1,b_1,...,a_n,b_n) with a_i + b_i >= 1 and total <= max_total.
void enumerate_blocks(std::size_t n, unsigned max_total, std::vector<std::pair<unsigned, unsigned>>& blocks,
                      unsigned used, const std::function<void()>& visit) {
  if (blocks.size() == n) {
    visit();
    return;
  }
  for (unsigned a = 0; a + used <= max_total; ++a) {
    for (unsigned b = 0; a + b + used <= max_total; ++b) {
      if (a + b == 0) continue;
      blocks.emplace_back(a, b);
      enumerate_blocks(n, max_total, blocks, used + a + b, visit);
      blocks.pop_back();
    }
  }
}

std::vector<int> doubled(const std::vector<int>& w, std::size_t copies) {
  std::vector<int> out;
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), w.begin(), w.end());
  return out;
}

// Variables first..first+count-1 of the given space.
PolyVector variables(const std::vector<int>& weights, std::size_t first, std::size_t count) {
  PolyVector out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(Polynomial::variable(weights, first + j));
  return out;
}

}  // namespace

CompiledPolyVector::CompiledPolyVector(const std::vector<Polynomial>& polys) {
  polys_.reserve(polys.size());
  for (const auto& p : polys) {
    polys_.emplace_back(p);
    max_exponent_ = std::max(max_exponent_, polys_.back().max_exponent());
  }
}

void CompiledPolyVector::evaluate(std::span<const double> point, Eigen::VectorXd& out) const {
  thread_local PowerTable table;
  table.fill(point, max_exponent_);
  out.resize(static_cast<Eigen::Index>(polys_.size()));
  for (std::size_t i = 0; i < polys_.size(); ++i) out[static_cast<Eigen::Index>(i)] = polys_[i].evaluate(table);
}

GroupLaw GroupLaw::compute(const StratifiedAlgebra& algebra) {
  const auto report = algebra.validate();
  if (!report.ok) throw PreconditionError("compute_group_law: invalid algebra: " + report.message);

  GroupLaw law;
  law.algebra_ = algebra;
  const std::size_t q = algebra.dimension();
  const unsigned step = static_cast<unsigned>(algebra.step());
  const std::vector<int> w2 = doubled(algebra.degrees(), 2);

  NestedCommutators nested(algebra, variables(w2, 0, q), variables(w2, q, q));
  PolyVector sum = zero_vector(w2, q);
  std::vector<std::pair<unsigned, unsigned>> blocks;
  for (std::size_t n = 1; n <= step; ++n) {
    enumerate_blocks(n, step, blocks, 0, [&] {
      // Trailing letters beyond one Y or (with b_n = 0) beyond one X give [Z, Z] = 0.
      const auto [an, bn] = blocks.back();
      if (bn > 1 || (bn == 0 && an > 1)) return;
      std::string word;
      Rational denom(1);
      unsigned total = 0;
      for (const auto& [a, b] : blocks) {
        word.append(a, 'X');
        word.append(b, 'Y');
        denom *= factorial(a) * factorial(b);
        total += a + b;
      }
      const Rational coeff = Rational(n % 2 == 1 ? 1 : -1) / (Rational(static_cast<unsigned long>(n)) * denom * total);
      const PolyVector& c = nested.get(word);
      for (std::size_t k = 0; k < q; ++k)
        if (!c[k].is_zero()) sum[k] += coeff * c[k];
    });
  }

  law.product_ = sum;
  law.remainder_.reserve(q);
  for (std::size_t i = 0; i < q; ++i)
    law.remainder_.push_back(sum[i] - Polynomial::variable(w2, i) - Polynomial::variable(w2, q + i));

  // X_ij(x) = dP_i/dy_j (x, 0).
  const std::vector<int>& w1 = algebra.degrees();
  PolyVector at_y0 = variables(w1, 0, q);
  for (std::size_t j = 0; j < q; ++j) at_y0.emplace_back(w1);
  law.fields_.assign(q, PolyVector(q));
  for (std::size_t j = 0; j < q; ++j) {
    PolyVector column;
    PolyVector translation;
    for (std::size_t i = 0; i < q; ++i) {
      Polynomial d = sum[i].partial_derivative(q + j);
      law.fields_[i][j] = d.substitute(at_y0);
      column.push_back(law.fields_[i][j]);
      translation.push_back(std::move(d));
    }
    law.field_eval_.emplace_back(column);
    law.translation_eval_.emplace_back(translation);
  }
  law.product_eval_ = CompiledPolyVector(law.product_);

  PolyVector shifted;
  for (std::size_t j = 0; j < q; ++j) shifted.push_back(-Polynomial::variable(w2, j));
  for (std::size_t j = 0; j < q; ++j)
    shifted.push_back(Polynomial::variable(w2, j) + Polynomial::variable(w2, q + j));
  PolyVector relative;
  for (const auto& p : law.product_) relative.push_back(p.substitute(shifted));
  law.relative_eval_ = CompiledPolyVector(relative);
  return law;
}

void GroupLaw::check_point(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension())
    throw DimensionError("group point has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dimension()));
}

Point GroupLaw::multiply(const Point& x, const Point& y) const {
  check_point(x);
  check_point(y);
  const auto q = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd xy(2 * q);
  xy << x, y;
  Point out;
  product_eval_.evaluate(std::span<const double>(xy.data(), static_cast<std::size_t>(xy.size())), out);
  return out;
}

Point GroupLaw::relative(const Point& x, const Point& y) const {
  check_point(x);
  check_point(y);
  const auto q = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd xd(2 * q);
  xd << x, y - x;
  Point out;
  relative_eval_.evaluate(std::span<const double>(xd.data(), static_cast<std::size_t>(xd.size())), out);
  return out;
}

Point GroupLaw::inverse(const Point& x) const {
  check_point(x);
  return -x;
}

Point GroupLaw::dilate(double r, const Point& x) const {
  check_point(x);
  return carnot::dilate(algebra_, r, x);
}

Eigen::MatrixXd GroupLaw::field_matrix(const Point& x) const {
  check_point(x);
  const auto q = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd m(q, q);
  Eigen::VectorXd col;
  const std::span<const double> pt(x.data(), static_cast<std::size_t>(q));
  for (Eigen::Index j = 0; j < q; ++j) {
    field_eval_[static_cast<std::size_t>(j)].evaluate(pt, col);
    m.col(j) = col;
  }
  return m;
}

Eigen::MatrixXd GroupLaw::left_translation_jacobian(const Point& x, const Point& y) const {
  check_point(x);
  check_point(y);
  const auto q = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd xy(2 * q);
  xy << x, y;
  const std::span<const double> pt(xy.data(), static_cast<std::size_t>(xy.size()));
  Eigen::MatrixXd m(q, q);
  Eigen::VectorXd col;
  for (Eigen::Index j = 0; j < q; ++j) {
    translation_eval_[static_cast<std::size_t>(j)].evaluate(pt, col);
    m.col(j) = col;
  }
  return m;
}

bool GroupLaw::is_associative() const {
  const std::size_t q = dimension();
  const std::vector<int> w3 = doubled(algebra_.degrees(), 3);
  const PolyVector x = variables(w3, 0, q), y = variables(w3, q, q), z = variables(w3, 2 * q, q);
  auto concat = [](const PolyVector& a, const PolyVector& b) {
    PolyVector out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
  };
  const PolyVector xy_args = concat(x, y), yz_args = concat(y, z);
  PolyVector xy, yz;
  for (const auto& p : product_) {
    xy.push_back(p.substitute(xy_args));
    yz.push_back(p.substitute(yz_args));
  }
  const PolyVector left_args = concat(xy, z), right_args = concat(x, yz);
  for (const auto& p : product_)
    if (!(p.substitute(left_args) == p.substitute(right_args))) return false;
  return true;
}

LawStructureReport GroupLaw::check_structure(bool include_associativity) const {
  const std::size_t q = dimension();
  const std::vector<int>& w1 = algebra_.degrees();
  PolyVector x_only = variables(w1, 0, q), y_only;
  for (std::size_t j = 0; j < q; ++j) {
    x_only.emplace_back(w1);
    y_only.emplace_back(w1);
  }
  const PolyVector vars = variables(w1, 0, q);
  y_only.insert(y_only.end(), vars.begin(), vars.end());

  auto fail = [](std::string msg) { return LawStructureReport{false, std::move(msg)}; };
  for (std::size_t i = 0; i < q; ++i) {
    const std::string at = " (i=" + std::to_string(i + 1) + ")";
    if (!(product_[i].substitute(x_only) == vars[i])) return fail("P(x,0) != x" + at);
    if (!(product_[i].substitute(y_only) == vars[i])) return fail("P(0,y) != y" + at);
    const Polynomial& qi = remainder_[i];
    const int di = algebra_.degree_of(i);
    if (di == 1 && !qi.is_zero()) return fail("Q nonzero on the first layer" + at);
    for (std::size_t v = 0; v < 2 * q; ++v)
      if (qi.depends_on(v) && algebra_.degree_of(v % q) >= di)
        return fail("Q depends on a variable of degree >= d(i)" + at);
    if (!qi.is_weighted_homogeneous(di)) return fail("Q not homogeneous of degree d(i)" + at);
  }
  if (include_associativity && !is_associative()) return fail("associativity");
  return {};
}

std::string GroupLaw::product_to_string(std::size_t i) const {
  const std::size_t q = dimension();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < q; ++j) names.push_back("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j < q; ++j) names.push_back("y" + std::to_string(j + 1));
  return product_.at(i).to_string(names);
}

Point dilate(const StratifiedAlgebra& algebra, double r, const Point& x) {
  if (!(r > 0.0)) throw PreconditionError("dilation factor must be positive");
  if (static_cast<std::size_t>(x.size()) != algebra.dimension()) throw DimensionError("dilate: wrong point length");
  Point out = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) out[j] *= std::pow(r, algebra.degree_of(static_cast<std::size_t>(j)));
  return out;
}

IdealMembershipReport ideal_membership_check(const GroupLaw& law, const std::vector<std::size_t>& subset) {
  const StratifiedAlgebra& a = law.algebra();
  const std::size_t q = a.dimension();
  std::vector<bool> in_j(q, false);
  std::vector<RationalVector> spanning;
  for (std::size_t j : subset) {
    if (j >= q) throw DimensionError("ideal_membership_check: index out of range");
    if (in_j[j]) throw PreconditionError("ideal_membership_check: repeated index");
    in_j[j] = true;
    spanning.push_back(a.basis_vector(j));
  }
  if (!spanning.empty() && !a.subalgebra_closure_check(spanning).closed)
    throw PreconditionError("ideal_membership_check: index set does not span a subalgebra");

  const std::vector<int> w2 = doubled(a.degrees(), 2);
  PolyVector assignment;
  for (std::size_t v = 0; v < 2 * q; ++v)
    assignment.push_back(in_j[v % q] ? Polynomial::variable(w2, v) : Polynomial(w2));
  IdealMembershipReport report;
  for (std::size_t i = 0; i < q; ++i) {
    if (in_j[i]) continue;
    Polynomial residual = law.remainder()[i].substitute(assignment);
    if (!residual.is_zero()) {
      report.holds = false;
      report.failing_index = i;
      report.residual = std::move(residual);
      return report;
    }
  }
  return report;
}

HomogeneousNorm::HomogeneousNorm(const StratifiedAlgebra& algebra, std::vector<double> epsilons)
    : epsilons_(std::move(epsilons)) {
  if (epsilons_.size() != algebra.step()) throw DimensionError("one epsilon per layer required");
  for (double e : epsilons_)
    if (!(e > 0.0) || !std::isfinite(e)) throw PreconditionError("norm constants must be positive");
  for (std::size_t k = 1; k <= algebra.step(); ++k) {
    layer_begin_.push_back(algebra.layer_begin(static_cast<int>(k)));
    layer_size_.push_back(algebra.layer_size(static_cast<int>(k)));
  }
}

double HomogeneousNorm::layer_norm(const Eigen::VectorXd& v, int k) const {
  const auto idx = static_cast<std::size_t>(k - 1);
  return v.segment(static_cast<Eigen::Index>(layer_begin_.at(idx)), static_cast<Eigen::Index>(layer_size_[idx]))
      .norm();
}

double HomogeneousNorm::operator()(const Eigen::VectorXd& v) const {
  if (!calibrated()) throw PreconditionError("homogeneous norm used before calibration");
  const std::size_t q = layer_begin_.back() + layer_size_.back();
  if (static_cast<std::size_t>(v.size()) != q) throw DimensionError("norm: wrong vector length");
  double n = 0.0;
  for (std::size_t k = 0; k < epsilons_.size(); ++k) {
    const double block = layer_norm(v, static_cast<int>(k + 1)) / epsilons_[k];
    n = std::max(n, k == 0 ? block : std::pow(block, 1.0 / static_cast<double>(k + 1)));
  }
  return n;
}

double homogeneous_distance(const HomogeneousNorm& norm, const GroupLaw& law, const Point& x, const Point& y) {
  if (!norm.calibrated()) throw PreconditionError("homogeneous distance needs a calibrated norm");
  return norm(law.relative(x, y));
}

namespace {

// Raw calibration sample: per-layer unit directions and radii in [0,1] with one
// radius forced to 1, so that N(a) = 1 for every choice of constants.
struct RawUnitPoint {
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> radii;
};

struct RawPair {
  RawUnitPoint a, b;
  double scale = 1.0;  // b is dilated by this factor
};

RawUnitPoint draw_unit_point(const StratifiedAlgebra& alg, RandomStream& rng) {
  const std::size_t step = alg.step();
  RawUnitPoint p;
  const auto forced = static_cast<std::size_t>(rng.uniform() * static_cast<double>(step)) % step;
  for (std::size_t k = 0; k < step; ++k) {
    const auto m = static_cast<Eigen::Index>(alg.layer_size(static_cast<int>(k + 1)));
    Eigen::VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) d[i] = rng.normal();
    const double n = d.norm();
    d = n > 0 ? Eigen::VectorXd(d / n) : Eigen::VectorXd::Unit(m, 0);
    p.directions.push_back(std::move(d));
    double r = rng.uniform();
    if (rng.uniform() < 0.25) r = 0.0;
    p.radii.push_back(k == forced ? 1.0 : r);
  }
  return p;
}

Point realize(const StratifiedAlgebra& alg, const RawUnitPoint& raw, const std::vector<double>& eps) {
  Point x = Point::Zero(static_cast<Eigen::Index>(alg.dimension()));
  for (std::size_t k = 0; k < raw.radii.size(); ++k) {
    const double len = eps[k] * std::pow(raw.radii[k], static_cast<double>(k + 1));
    x.segment(static_cast<Eigen::Index>(alg.layer_begin(static_cast<int>(k + 1))), raw.directions[k].size()) =
        len * raw.directions[k];
  }
  return x;
}

// Largest sampled N(ab) / (N(a) + N(b)).
double worst_ratio(const GroupLaw& law, const std::vector<RawPair>& pairs, const std::vector<double>& eps) {
  const HomogeneousNorm norm(law.algebra(), eps);
  double worst = 0.0;
  for (const auto& pr : pairs) {
    const Point a = realize(law.algebra(), pr.a, eps);
    const Point b = law.dilate(pr.scale, realize(law.algebra(), pr.b, eps));
    const double lhs = norm(law.multiply(a, b));
    worst = std::max(worst, lhs / (1.0 + pr.scale));
  }
  return worst;
}

}  // namespace

CalibrationResult calibrate_norm(const GroupLaw& law, const CalibrationOptions& options) {
  if (options.sample_count < 10000) throw PreconditionError("calibrate_norm needs at least 10^4 samples");
  const StratifiedAlgebra& alg = law.algebra();
  constexpr std::size_t chunk_size = 1000;
  const std::size_t chunks = (options.sample_count + chunk_size - 1) / chunk_size;
  std::vector<RawPair> pairs(options.sample_count);
  parallel_chunks(chunks, [&](std::size_t c) {
    RandomStream rng(options.seed, stream_tag::calibration, c);
    const std::size_t end = std::min(options.sample_count, (c + 1) * chunk_size);
    for (std::size_t s = c * chunk_size; s < end; ++s) {
      pairs[s].a = draw_unit_point(alg, rng);
      pairs[s].b = draw_unit_point(alg, rng);
      pairs[s].scale = std::exp(rng.uniform(std::log(0.01), std::log(100.0)));
    }
  });

  std::vector<double> eps(alg.step(), 1.0);
  auto passes = [&](const std::vector<double>& e) { return worst_ratio(law, pairs, e) <= 1.0 + options.tolerance; };
  for (std::size_t k = 1; k < eps.size(); ++k) {
    if (passes(eps)) break;  // later layers at 1 already admissible
    // Search eps_k downward for an admissible value, then bisect to the largest one.
    double fail_at = 1.0, pass_at = 0.0;
    for (int n = 1; n <= 30; ++n) {
      eps[k] = std::ldexp(1.0, -n);
      if (passes(eps)) {
        pass_at = eps[k];
        break;
      }
      fail_at = eps[k];
    }
    if (pass_at == 0.0) {
      eps[k] = 1.0;
      continue;  // try the next layer with this one left at 1
    }
    for (int it = 0; it < 40; ++it) {
      eps[k] = 0.5 * (pass_at + fail_at);
      (passes(eps) ? pass_at : fail_at) = eps[k];
    }
    eps[k] = pass_at;
  }
  const double worst = worst_ratio(law, pairs, eps);
  if (worst > 1.0 + options.tolerance)
    throw NumericalError("norm calibration failed: no admissible constants in (0,1], worst ratio " +
                         std::to_string(worst));
  return {HomogeneousNorm(alg, eps), options.sample_count, options.seed, worst};
}

}  // namespace carnot
