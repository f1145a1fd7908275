#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "carnot/error.hpp"
#include "carnot/rational.hpp"

namespace carnot {

/// Syntax error in expression text. offset is 0-based; line and column are 1-based.
class ParseError : public IoError {
 public:
  ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column);
  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t offset_, line_, column_;
};

enum class ExprKind { Number, Variable, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Function { Exp, Ln, Sin, Cos, Sqrt };

/// Immutable expression tree over exact literals, named variables, + - * /,
/// integer powers and exp, ln, sin, cos, sqrt. Copies share nodes.
class Expr {
 public:
  struct Node;

  Expr();  ///< the literal 0

  /// Non-negative terminating decimals become literals; anything else is built
  /// from them with negation and division so that printing round-trips.
  static Expr number(const Rational& value);
  static Expr variable(const std::string& name);
  static Expr call(Function f, Expr arg);
  static Expr pow(Expr base, int exponent);

  ExprKind kind() const;
  const Rational& value() const;      ///< Number only
  const std::string& name() const;    ///< Variable only
  Function function() const;          ///< Call only
  int exponent() const;               ///< Pow only
  const std::vector<Expr>& children() const;

  friend Expr operator+(Expr a, Expr b);
  friend Expr operator-(Expr a, Expr b);
  friend Expr operator*(Expr a, Expr b);
  friend Expr operator/(Expr a, Expr b);
  friend Expr operator-(Expr a);
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(ExprKind kind, std::vector<Expr> children);

  std::shared_ptr<const Node> node_;
};

Expr parse_expr(const std::string& text);
/// Canonical text with minimal parentheses; parse_expr(print_expr(e)) == e.
std::string print_expr(const Expr& e);
/// Replaces variables by expressions; unmapped variables stay.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& assignments);
std::set<std::string> free_variables(const Expr& e);
const char* function_name(Function f);

/// Value with first partials against a fixed parameter list.
struct Dual {
  double value = 0.0;
  std::vector<double> partials;
};

/// Forward-mode evaluation. Throws PreconditionError on unbound variables and on
/// domain errors (sqrt of a negative, ln of a non-positive, division by zero).
Dual eval_dual(const Expr& e, const std::map<std::string, Dual>& env);
double evaluate(const Expr& e, const std::map<std::string, double>& env);

/// Flat instruction tape over a fixed parameter list for hot loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws PreconditionError if a variable is not among the parameters.
  CompiledExpr(const Expr& e, const std::vector<std::string>& parameters);

  std::size_t parameter_count() const { return parameter_count_; }
  double evaluate(std::span<const double> u) const;
  /// Value and gradient (gradient.size() == parameter_count()).
  double evaluate(std::span<const double> u, std::span<double> gradient) const;

 private:
  enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Ln, Sin, Cos, Sqrt };
  struct Instr {
    Op op;
    std::uint32_t a = 0, b = 0;  // operand slots, or parameter index for Var
    int exponent = 0;
    double constant = 0.0;
  };
  std::uint32_t emit(const Expr& e, const std::vector<std::string>& parameters);

  std::vector<Instr> tape_;
  std::size_t parameter_count_ = 0;
};

}  // namespace carnot
