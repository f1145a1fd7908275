#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

using Exponents = std::vector<std::uint16_t>;

/// Graded lexicographic order: lower total degree first, then x1 > x2 > ...
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const;
};

/// Multivariate polynomial over Q with a positive weight d(j) attached to every
/// variable. Terms are kept in canonical graded-lex order with no zero
/// coefficients, so equality is structural.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational, GradedLexLess>;

  Polynomial() = default;
  /// Zero polynomial in `weights.size()` variables.
  explicit Polynomial(std::vector<int> weights);

  static Polynomial constant(std::vector<int> weights, const Rational& c);
  static Polynomial variable(std::vector<int> weights, std::size_t j);
  static Polynomial monomial(std::vector<int> weights, Exponents exps, const Rational& c);

  std::size_t variable_count() const { return weights_.size(); }
  const std::vector<int>& weights() const { return weights_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  /// Coefficient of the given monomial (zero when absent).
  Rational coefficient(const Exponents& exps) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.weights_ == b.weights_ && a.terms_ == b.terms_;
  }

  /// Weighted degree of one monomial: sum_j d(j) * e_j.
  int monomial_weight(const Exponents& exps) const;
  /// Common monomial weight, or nullopt for zero or inhomogeneous input.
  std::optional<int> weighted_degree() const;
  bool is_weighted_homogeneous(int degree) const;
  /// Largest exponent appearing for variable j.
  unsigned max_exponent(std::size_t j) const;
  /// True iff variable j occurs in some term.
  bool depends_on(std::size_t j) const;

  Polynomial partial_derivative(std::size_t j) const;
  /// Composition p(a_1, ..., a_n); every a_i must live in the same variable space.
  Polynomial substitute(std::span<const Polynomial> assignments) const;
  /// Floating-point evaluation.
  double evaluate(std::span<const double> point) const;

  /// Human-readable form, e.g. "x3 + y3 + 1/2*x1*y2 - 1/2*x2*y1".
  std::string to_string(std::span<const std::string> names) const;
  std::string to_string() const;

 private:
  void check_compatible(const Polynomial& other, const char* op) const;
  void add_term(const Exponents& exps, const Rational& c);

  std::vector<int> weights_;
  TermMap terms_;
};

Polynomial add(const Polynomial& a, const Polynomial& b);
Polynomial mul(const Polynomial& a, const Polynomial& b);
Polynomial scale(const Rational& c, const Polynomial& a);

/// Flat table of point_j^e for e = 0..max_exponent, reusable across calls.
class PowerTable {
 public:
  void fill(std::span<const double> point, unsigned max_exponent);
  double operator()(std::size_t j, unsigned e) const { return data_[j * stride_ + e]; }

 private:
  std::vector<double> data_;
  std::size_t stride_ = 1;
};

/// Double-precision image of a Polynomial for hot loops.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  /// The table must cover this polynomial's max exponent.
  double evaluate(const PowerTable& powers) const;
  double evaluate(std::span<const double> point) const;
  std::size_t variable_count() const { return variable_count_; }
  unsigned max_exponent() const { return max_exponent_; }

 private:
  struct Factor {
    std::uint32_t variable;
    std::uint16_t exponent;
  };
  struct Term {
    double coefficient;
    std::vector<Factor> factors;
  };
  std::vector<Term> terms_;
  std::size_t variable_count_ = 0;
  unsigned max_exponent_ = 0;
};

}  // namespace carnot
