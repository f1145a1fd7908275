#include "carnot/expr.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <functional>

namespace carnot {

struct Expr::Node {
  ExprKind kind = ExprKind::Number;
  Rational value;
  std::string name;
  Function function = Function::Exp;
  int exponent = 0;
  std::vector<Expr> children;
};

ParseError::ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column)
    : IoError(message + " at offset " + std::to_string(offset) + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
      offset_(offset),
      line_(line),
      column_(column) {}

namespace {

bool is_terminating_decimal(const Rational& r) {
  mpz_class d = r.get_den();
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) d /= 2;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) d /= 5;
  return d == 1;
}

std::string decimal_text(const Rational& r) {
  const mpz_class den = r.get_den();
  std::size_t k = 0;
  mpz_class p10 = 1;
  while (!mpz_divisible_p(p10.get_mpz_t(), den.get_mpz_t())) {
    p10 *= 10;
    ++k;
  }
  const mpz_class scaled = r.get_num() * (p10 / den);
  std::string s = scaled.get_str();
  if (k == 0) return s;
  if (s.size() <= k) s.insert(0, k + 1 - s.size(), '0');
  s.insert(s.size() - k, ".");
  return s;
}

int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

double ipow(double x, int n) {
  const bool invert = n < 0;
  unsigned m = invert ? static_cast<unsigned>(-(long long)n) : static_cast<unsigned>(n);
  double result = 1.0, base = x;
  while (m) {
    if (m & 1u) result *= base;
    base *= base;
    m >>= 1u;
  }
  return invert ? 1.0 / result : result;
}

[[noreturn]] void domain_error(const std::string& what) { throw PreconditionError("domain error: " + what); }

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, pos_, line, column);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) e = e * unary();
      else if (accept('/')) e = e / unary();
      else return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const bool paren = accept('(');
    skip_space();
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) negative = text_[pos_++] == '-';
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer exponent");
    const std::string digits = text_.substr(start, pos_ - start);
    if (digits.size() > 9) fail("exponent too large");
    const int n = std::stoi(digits);
    if (paren) expect(')');
    return Expr::pow(std::move(base), negative ? -n : n);
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string literal = text_.substr(start, pos_ - start);
    try {
      return Expr::number(parse_rational(literal));
    } catch (const IoError&) {
      pos_ = start;
      fail("malformed number '" + literal + "'");
    }
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    const std::size_t after = pos_;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      static const std::map<std::string, Function> functions{{"exp", Function::Exp},
                                                                {"ln", Function::Ln},
                                                                {"sin", Function::Sin},
                                                                {"cos", Function::Cos},
                                                                {"sqrt", Function::Sqrt}};
      auto it = functions.find(name);
      if (it == functions.end()) {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      ++pos_;
      Expr arg = expression();
      expect(')');
      return Expr::call(it->second, std::move(arg));
    }
    pos_ = after;
    return Expr::variable(name);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void print_into(const Expr& e, std::string& out) {
  auto child = [&](const Expr& c, bool parens) {
    if (parens) out += '(';
    print_into(c, out);
    if (parens) out += ')';
  };
  const auto& ch = e.children();
  switch (e.kind()) {
    case ExprKind::Number: out += decimal_text(e.value()); return;
    case ExprKind::Variable: out += e.name(); return;
    case ExprKind::Add:
    case ExprKind::Sub:
      child(ch[0], precedence(ch[0]) < 1);
      out += e.kind() == ExprKind::Add ? " + " : " - ";
      child(ch[1], precedence(ch[1]) <= 1);
      return;
    case ExprKind::Mul:
    case ExprKind::Div:
      child(ch[0], precedence(ch[0]) < 2);
      out += e.kind() == ExprKind::Mul ? "*" : "/";
      child(ch[1], precedence(ch[1]) <= 2);
      return;
    case ExprKind::Neg:
      out += '-';
      child(ch[0], precedence(ch[0]) < 3);
      return;
    case ExprKind::Pow:
      child(ch[0], precedence(ch[0]) < 5);
      out += '^';
      if (e.exponent() < 0) out += "(" + std::to_string(e.exponent()) + ")";
      else out += std::to_string(e.exponent());
      return;
    case ExprKind::Call:
      out += function_name(e.function());
      out += '(';
      print_into(ch[0], out);
      out += ')';
      return;
  }
}

}  // namespace

Expr::Expr() : Expr(number(Rational(0))) {}

Expr Expr::make(ExprKind kind, std::vector<Expr> children) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->children = std::move(children);
  return Expr(std::move(n));
}

Expr Expr::number(const Rational& raw) {
  Rational value = raw;
  value.canonicalize();
  if (value < 0) return -number(-value);
  if (!is_terminating_decimal(value)) return number(Rational(value.get_num())) / number(Rational(value.get_den()));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(const std::string& name) {
  if (name.empty()) throw PreconditionError("variable name must be nonempty");
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->name = name;
  return Expr(std::move(n));
}

Expr Expr::call(Function f, Expr arg) {
  Expr e = make(ExprKind::Call, {std::move(arg)});
  std::const_pointer_cast<Node>(e.node_)->function = f;
  return e;
}

Expr Expr::pow(Expr base, int exponent) {
  Expr e = make(ExprKind::Pow, {std::move(base)});
  std::const_pointer_cast<Node>(e.node_)->exponent = exponent;
  return e;
}

ExprKind Expr::kind() const { return node_->kind; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Function Expr::function() const { return node_->function; }
int Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

Expr operator+(Expr a, Expr b) { return Expr::make(ExprKind::Add, {std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return Expr::make(ExprKind::Sub, {std::move(a), std::move(b)}); }
Expr operator*(Expr a, Expr b) { return Expr::make(ExprKind::Mul, {std::move(a), std::move(b)}); }
Expr operator/(Expr a, Expr b) { return Expr::make(ExprKind::Div, {std::move(a), std::move(b)}); }
Expr operator-(Expr a) { return Expr::make(ExprKind::Neg, {std::move(a)}); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Number: return a.value() == b.value();
    case ExprKind::Variable: return a.name() == b.name();
    case ExprKind::Pow:
      if (a.exponent() != b.exponent()) return false;
      break;
    case ExprKind::Call:
      if (a.function() != b.function()) return false;
      break;
    default: break;
  }
  const auto& ca = a.children();
  const auto& cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (!(ca[i] == cb[i])) return false;
  return true;
}

const char* function_name(Function f) {
  switch (f) {
    case Function::Exp: return "exp";
    case Function::Ln: return "ln";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
  }
  return "?";
}

Expr parse_expr(const std::string& text) { return Parser(text).parse(); }

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& assignments) {
  switch (e.kind()) {
    case ExprKind::Number: return e;
    case ExprKind::Variable: {
      auto it = assignments.find(e.name());
      return it == assignments.end() ? e : it->second;
    }
    case ExprKind::Pow: return Expr::pow(substitute(e.children()[0], assignments), e.exponent());
    case ExprKind::Call: return Expr::call(e.function(), substitute(e.children()[0], assignments));
    case ExprKind::Neg: return -substitute(e.children()[0], assignments);
    case ExprKind::Add: return substitute(e.children()[0], assignments) + substitute(e.children()[1], assignments);
    case ExprKind::Sub: return substitute(e.children()[0], assignments) - substitute(e.children()[1], assignments);
    case ExprKind::Mul: return substitute(e.children()[0], assignments) * substitute(e.children()[1], assignments);
    case ExprKind::Div: return substitute(e.children()[0], assignments) / substitute(e.children()[1], assignments);
  }
  return e;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  if (e.kind() == ExprKind::Variable) out.insert(e.name());
  for (const auto& c : e.children()) {
    auto sub = free_variables(c);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

Dual eval_dual(const Expr& e, const std::map<std::string, Dual>& env) {
  std::size_t p = env.empty() ? 0 : env.begin()->second.partials.size();
  for (const auto& [name, d] : env)
    if (d.partials.size() != p) throw DimensionError("eval_dual: inconsistent partial counts");

  std::function<Dual(const Expr&)> go = [&](const Expr& x) -> Dual {
    Dual r;
    r.partials.assign(p, 0.0);
    const auto& ch = x.children();
    switch (x.kind()) {
      case ExprKind::Number: r.value = x.value().get_d(); return r;
      case ExprKind::Variable: {
        auto it = env.find(x.name());
        if (it == env.end()) throw PreconditionError("unbound variable '" + x.name() + "'");
        return it->second;
      }
      case ExprKind::Neg: {
        r = go(ch[0]);
        r.value = -r.value;
        for (auto& d : r.partials) d = -d;
        return r;
      }
      case ExprKind::Add:
      case ExprKind::Sub: {
        const Dual a = go(ch[0]), b = go(ch[1]);
        const double s = x.kind() == ExprKind::Add ? 1.0 : -1.0;
        r.value = a.value + s * b.value;
        for (std::size_t i = 0; i < p; ++i) r.partials[i] = a.partials[i] + s * b.partials[i];
        return r;
      }
      case ExprKind::Mul: {
        const Dual a = go(ch[0]), b = go(ch[1]);
        r.value = a.value * b.value;
        for (std::size_t i = 0; i < p; ++i) r.partials[i] = a.partials[i] * b.value + a.value * b.partials[i];
        return r;
      }
      case ExprKind::Div: {
        const Dual a = go(ch[0]), b = go(ch[1]);
        if (b.value == 0.0) domain_error("division by zero");
        r.value = a.value / b.value;
        for (std::size_t i = 0; i < p; ++i) r.partials[i] = (a.partials[i] - r.value * b.partials[i]) / b.value;
        return r;
      }
      case ExprKind::Pow: {
        const Dual a = go(ch[0]);
        const int n = x.exponent();
        if (n == 0) {
          r.value = 1.0;
          return r;
        }
        if (n < 0 && a.value == 0.0) domain_error("negative power of zero");
        r.value = ipow(a.value, n);
        const double d = n * ipow(a.value, n - 1);
        for (std::size_t i = 0; i < p; ++i) r.partials[i] = d * a.partials[i];
        return r;
      }
      case ExprKind::Call: {
        const Dual a = go(ch[0]);
        double d = 0.0;
        switch (x.function()) {
          case Function::Exp: r.value = std::exp(a.value); d = r.value; break;
          case Function::Ln:
            if (a.value <= 0.0) domain_error("ln of a non-positive value");
            r.value = std::log(a.value);
            d = 1.0 / a.value;
            break;
          case Function::Sin: r.value = std::sin(a.value); d = std::cos(a.value); break;
          case Function::Cos: r.value = std::cos(a.value); d = -std::sin(a.value); break;
          case Function::Sqrt:
            if (a.value < 0.0) domain_error("sqrt of a negative value");
            r.value = std::sqrt(a.value);
            if (r.value == 0.0) {
              for (double g : a.partials)
                if (g != 0.0) domain_error("sqrt is not differentiable at zero");
              return r;
            }
            d = 0.5 / r.value;
            break;
        }
        for (std::size_t i = 0; i < p; ++i) r.partials[i] = d * a.partials[i];
        return r;
      }
    }
    return r;
  };
  return go(e);
}

double evaluate(const Expr& e, const std::map<std::string, double>& env) {
  std::map<std::string, Dual> duals;
  for (const auto& [name, v] : env) duals[name] = Dual{v, {}};
  return eval_dual(e, duals).value;
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& parameters)
    : parameter_count_(parameters.size()) {
  emit(e, parameters);
}

std::uint32_t CompiledExpr::emit(const Expr& e, const std::vector<std::string>& parameters) {
  Instr in{};
  const auto& ch = e.children();
  switch (e.kind()) {
    case ExprKind::Number:
      in.op = Op::Const;
      in.constant = e.value().get_d();
      break;
    case ExprKind::Variable: {
      auto it = std::find(parameters.begin(), parameters.end(), e.name());
      if (it == parameters.end()) throw PreconditionError("unbound variable '" + e.name() + "'");
      in.op = Op::Var;
      in.a = static_cast<std::uint32_t>(it - parameters.begin());
      break;
    }
    case ExprKind::Neg:
      in.op = Op::Neg;
      in.a = emit(ch[0], parameters);
      break;
    case ExprKind::Pow:
      in.op = Op::Pow;
      in.a = emit(ch[0], parameters);
      in.exponent = e.exponent();
      break;
    case ExprKind::Call:
      in.a = emit(ch[0], parameters);
      switch (e.function()) {
        case Function::Exp: in.op = Op::Exp; break;
        case Function::Ln: in.op = Op::Ln; break;
        case Function::Sin: in.op = Op::Sin; break;
        case Function::Cos: in.op = Op::Cos; break;
        case Function::Sqrt: in.op = Op::Sqrt; break;
      }
      break;
    default:
      in.a = emit(ch[0], parameters);
      in.b = emit(ch[1], parameters);
      in.op = e.kind() == ExprKind::Add ? Op::Add
              : e.kind() == ExprKind::Sub ? Op::Sub
              : e.kind() == ExprKind::Mul ? Op::Mul
                                          : Op::Div;
      break;
  }
  tape_.push_back(in);
  return static_cast<std::uint32_t>(tape_.size() - 1);
}

double CompiledExpr::evaluate(std::span<const double> u) const {
  if (u.size() != parameter_count_) throw DimensionError("CompiledExpr: wrong parameter count");
  thread_local std::vector<double> v;
  v.resize(tape_.size());
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& in = tape_[k];
    switch (in.op) {
      case Op::Const: v[k] = in.constant; break;
      case Op::Var: v[k] = u[in.a]; break;
      case Op::Add: v[k] = v[in.a] + v[in.b]; break;
      case Op::Sub: v[k] = v[in.a] - v[in.b]; break;
      case Op::Mul: v[k] = v[in.a] * v[in.b]; break;
      case Op::Div:
        if (v[in.b] == 0.0) domain_error("division by zero");
        v[k] = v[in.a] / v[in.b];
        break;
      case Op::Neg: v[k] = -v[in.a]; break;
      case Op::Pow:
        if (in.exponent < 0 && v[in.a] == 0.0) domain_error("negative power of zero");
        v[k] = ipow(v[in.a], in.exponent);
        break;
      case Op::Exp: v[k] = std::exp(v[in.a]); break;
      case Op::Ln:
        if (v[in.a] <= 0.0) domain_error("ln of a non-positive value");
        v[k] = std::log(v[in.a]);
        break;
      case Op::Sin: v[k] = std::sin(v[in.a]); break;
      case Op::Cos: v[k] = std::cos(v[in.a]); break;
      case Op::Sqrt:
        if (v[in.a] < 0.0) domain_error("sqrt of a negative value");
        v[k] = std::sqrt(v[in.a]);
        break;
    }
  }
  return v.back();
}

double CompiledExpr::evaluate(std::span<const double> u, std::span<double> gradient) const {
  if (u.size() != parameter_count_ || gradient.size() != parameter_count_)
    throw DimensionError("CompiledExpr: wrong parameter count");
  const std::size_t p = parameter_count_;
  thread_local std::vector<double> v, g;
  v.resize(tape_.size());
  g.assign(tape_.size() * p, 0.0);
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& in = tape_[k];
    double* gk = g.data() + k * p;
    const double* ga = g.data() + in.a * p;
    const double* gb = g.data() + in.b * p;
    double d = 0.0;
    switch (in.op) {
      case Op::Const: v[k] = in.constant; continue;
      case Op::Var:
        v[k] = u[in.a];
        gk[in.a] = 1.0;
        continue;
      case Op::Add:
        v[k] = v[in.a] + v[in.b];
        for (std::size_t i = 0; i < p; ++i) gk[i] = ga[i] + gb[i];
        continue;
      case Op::Sub:
        v[k] = v[in.a] - v[in.b];
        for (std::size_t i = 0; i < p; ++i) gk[i] = ga[i] - gb[i];
        continue;
      case Op::Mul:
        v[k] = v[in.a] * v[in.b];
        for (std::size_t i = 0; i < p; ++i) gk[i] = ga[i] * v[in.b] + v[in.a] * gb[i];
        continue;
      case Op::Div:
        if (v[in.b] == 0.0) domain_error("division by zero");
        v[k] = v[in.a] / v[in.b];
        for (std::size_t i = 0; i < p; ++i) gk[i] = (ga[i] - v[k] * gb[i]) / v[in.b];
        continue;
      case Op::Neg:
        v[k] = -v[in.a];
        for (std::size_t i = 0; i < p; ++i) gk[i] = -ga[i];
        continue;
      case Op::Pow:
        if (in.exponent == 0) {
          v[k] = 1.0;
          continue;
        }
        if (in.exponent < 0 && v[in.a] == 0.0) domain_error("negative power of zero");
        v[k] = ipow(v[in.a], in.exponent);
        d = in.exponent * ipow(v[in.a], in.exponent - 1);
        break;
      case Op::Exp:
        v[k] = std::exp(v[in.a]);
        d = v[k];
        break;
      case Op::Ln:
        if (v[in.a] <= 0.0) domain_error("ln of a non-positive value");
        v[k] = std::log(v[in.a]);
        d = 1.0 / v[in.a];
        break;
      case Op::Sin:
        v[k] = std::sin(v[in.a]);
        d = std::cos(v[in.a]);
        break;
      case Op::Cos:
        v[k] = std::cos(v[in.a]);
        d = -std::sin(v[in.a]);
        break;
      case Op::Sqrt:
        if (v[in.a] < 0.0) domain_error("sqrt of a negative value");
        v[k] = std::sqrt(v[in.a]);
        if (v[k] == 0.0) {
          for (std::size_t i = 0; i < p; ++i)
            if (ga[i] != 0.0) domain_error("sqrt is not differentiable at zero");
          continue;
        }
        d = 0.5 / v[k];
        break;
    }
    for (std::size_t i = 0; i < p; ++i) gk[i] = d * ga[i];
  }
  std::copy(g.end() - static_cast<std::ptrdiff_t>(p), g.end(), gradient.begin());
  return v.back();
}

}  // namespace carnot
