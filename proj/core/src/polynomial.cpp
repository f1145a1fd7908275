#include "carnot/polynomial.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "carnot/error.hpp"

namespace carnot {

bool GradedLexLess::operator()(const Exponents& a, const Exponents& b) const {
  const auto ta = std::accumulate(a.begin(), a.end(), 0u);
  const auto tb = std::accumulate(b.begin(), b.end(), 0u);
  if (ta != tb) return ta < tb;
  // Among equal total degree, a larger leading exponent comes first.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

Polynomial::Polynomial(std::vector<int> weights) : weights_(std::move(weights)) {
  for (int w : weights_)
    if (w <= 0) throw PreconditionError("polynomial weights must be positive");
}

Polynomial Polynomial::constant(std::vector<int> weights, const Rational& c) {
  Polynomial p(std::move(weights));
  p.add_term(Exponents(p.variable_count(), 0), c);
  return p;
}

Polynomial Polynomial::variable(std::vector<int> weights, std::size_t j) {
  Polynomial p(std::move(weights));
  if (j >= p.variable_count()) throw DimensionError("variable index out of range");
  Exponents e(p.variable_count(), 0);
  e[j] = 1;
  p.add_term(e, Rational(1));
  return p;
}

Polynomial Polynomial::monomial(std::vector<int> weights, Exponents exps, const Rational& c) {
  Polynomial p(std::move(weights));
  if (exps.size() != p.variable_count()) throw DimensionError("monomial exponent length mismatch");
  p.add_term(exps, c);
  return p;
}

Rational Polynomial::coefficient(const Exponents& exps) const {
  auto it = terms_.find(exps);
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Exponents& exps, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(exps, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void Polynomial::check_compatible(const Polynomial& other, const char* op) const {
  if (weights_ != other.weights_)
    throw DimensionError(std::string(op) + ": polynomials live in different variable spaces");
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_compatible(other, "add");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_compatible(other, "sub");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, coef] : terms_) coef *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_compatible(b, "mul");
  Polynomial r(a.weights_);
  Exponents e(a.variable_count());
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t j = 0; j < e.size(); ++j) e[j] = static_cast<std::uint16_t>(ea[j] + eb[j]);
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial add(const Polynomial& a, const Polynomial& b) { return a + b; }
Polynomial mul(const Polynomial& a, const Polynomial& b) { return a * b; }
Polynomial scale(const Rational& c, const Polynomial& a) { return c * a; }

int Polynomial::monomial_weight(const Exponents& exps) const {
  int w = 0;
  for (std::size_t j = 0; j < exps.size(); ++j) w += weights_[j] * exps[j];
  return w;
}

std::optional<int> Polynomial::weighted_degree() const {
  if (terms_.empty()) return std::nullopt;
  const int first = monomial_weight(terms_.begin()->first);
  for (const auto& [e, c] : terms_)
    if (monomial_weight(e) != first) return std::nullopt;
  return first;
}

bool Polynomial::is_weighted_homogeneous(int degree) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [&](const auto& t) { return monomial_weight(t.first) == degree; });
}

unsigned Polynomial::max_exponent(std::size_t j) const {
  unsigned m = 0;
  for (const auto& [e, c] : terms_) m = std::max<unsigned>(m, e[j]);
  return m;
}

bool Polynomial::depends_on(std::size_t j) const { return max_exponent(j) > 0; }

Polynomial Polynomial::partial_derivative(std::size_t j) const {
  if (j >= variable_count()) throw DimensionError("partial_derivative: variable index out of range");
  Polynomial r(weights_);
  for (const auto& [e, c] : terms_) {
    if (e[j] == 0) continue;
    Exponents d = e;
    --d[j];
    r.add_term(d, c * e[j]);
  }
  return r;
}

Polynomial Polynomial::substitute(std::span<const Polynomial> assignments) const {
  if (assignments.size() != variable_count())
    throw DimensionError("substitute: expected one assignment per variable");
  if (assignments.empty()) return *this;
  const auto& target_weights = assignments.front().weights();
  for (const auto& a : assignments)
    if (a.weights() != target_weights)
      throw DimensionError("substitute: assignments must share one variable space");

  // powers[j][e] = assignments[j]^e, built lazily.
  std::vector<std::vector<Polynomial>> powers(variable_count());
  auto power = [&](std::size_t j, unsigned e) -> const Polynomial& {
    auto& table = powers[j];
    if (table.empty()) table.push_back(Polynomial::constant(target_weights, Rational(1)));
    while (table.size() <= e) table.push_back(table.back() * assignments[j]);
    return table[e];
  };

  Polynomial result(target_weights);
  for (const auto& [e, c] : terms_) {
    Polynomial term = Polynomial::constant(target_weights, c);
    for (std::size_t j = 0; j < e.size(); ++j)
      if (e[j] > 0) term = term * power(j, e[j]);
    result += term;
  }
  return result;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != variable_count()) throw DimensionError("evaluate: point has wrong length");
  return CompiledPolynomial(*this).evaluate(point);
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (names.size() != variable_count()) throw DimensionError("to_string: one name per variable");
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    const bool is_const = std::all_of(e.begin(), e.end(), [](auto x) { return x == 0; });
    Rational mag = abs(c);
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool need_star = false;
    if (is_const || mag != 1) {
      out << carnot::to_string(mag);
      need_star = true;
    }
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e[j] == 0) continue;
      if (need_star) out << "*";
      out << names[j];
      if (e[j] > 1) out << "^" << e[j];
      need_star = true;
    }
  }
  return out.str();
}

std::string Polynomial::to_string() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < variable_count(); ++j) names.push_back("x" + std::to_string(j + 1));
  return to_string(names);
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : variable_count_(p.variable_count()) {
  terms_.reserve(p.term_count());
  for (const auto& [e, c] : p.terms()) {
    Term t{c.get_d(), {}};
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e[j] == 0) continue;
      t.factors.push_back({static_cast<std::uint32_t>(j), e[j]});
      max_exponent_ = std::max<unsigned>(max_exponent_, e[j]);
    }
    terms_.push_back(std::move(t));
  }
}

double CompiledPolynomial::evaluate(const PowerTable& powers) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coefficient;
    for (const auto& f : t.factors) v *= powers(f.variable, f.exponent);
    sum += v;
  }
  return sum;
}

double CompiledPolynomial::evaluate(std::span<const double> point) const {
  if (point.size() != variable_count_) throw DimensionError("evaluate: point has wrong length");
  PowerTable table;
  table.fill(point, max_exponent_);
  return evaluate(table);
}

void PowerTable::fill(std::span<const double> point, unsigned max_exponent) {
  stride_ = max_exponent + 1;
  data_.resize(point.size() * stride_);
  for (std::size_t j = 0; j < point.size(); ++j) {
    double* row = data_.data() + j * stride_;
    row[0] = 1.0;
    for (unsigned e = 1; e <= max_exponent; ++e) row[e] = row[e - 1] * point[j];
  }
}

}  // namespace carnot
