#include "carnot/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "carnot/error.hpp"

namespace carnot {

namespace {

mpz_class pow10(long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return r;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw IoError("empty rational literal");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw IoError("zero denominator in '" + text + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') negative = text[pos++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw IoError("malformed rational literal '" + text + "'");
  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    std::size_t used = 0;
    try {
      exponent = std::stol(text.substr(pos), &used);
    } catch (const std::exception&) {
      throw IoError("malformed exponent in '" + text + "'");
    }
    pos += used;
  }
  if (pos != text.size()) throw IoError("trailing characters in rational literal '" + text + "'");
  Rational r{mpz_class(digits, 10)};
  long scale = exponent - frac_digits;
  if (scale > 0) r *= pow10(scale);
  if (scale < 0) r /= pow10(-scale);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

std::optional<Rational> rationalize(double value, long max_den, double tol) {
  if (!std::isfinite(value)) return std::nullopt;
  // Convergents h/k of the continued fraction of value.
  mpz_class h_prev = 1, h = static_cast<long>(std::floor(value));
  mpz_class k_prev = 0, k = 1;
  double frac = value - std::floor(value);
  while (true) {
    Rational candidate(h, k);
    candidate.canonicalize();
    if (std::abs(candidate.get_d() - value) <= tol) return candidate;
    if (frac < 1e-300) break;
    double inv = 1.0 / frac;
    long a = static_cast<long>(std::floor(inv));
    frac = inv - static_cast<double>(a);
    mpz_class h_next = a * h + h_prev;
    mpz_class k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = std::exchange(h, h_next);
    k_prev = std::exchange(k, k_next);
  }
  return std::nullopt;
}

std::size_t exact_rank(const RationalMatrix& rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::vector<std::vector<mpz_class>> a;
  a.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("exact_rank: ragged matrix");
    mpz_class lcm = 1;
    for (const auto& x : row) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), x.get_den_mpz_t());
    std::vector<mpz_class> ints;
    ints.reserve(cols);
    for (const auto& x : row) ints.emplace_back(x.get_num() * (lcm / x.get_den()));
    a.push_back(std::move(ints));
  }
  // Bareiss: every intermediate division is exact.
  std::size_t rank = 0;
  mpz_class prev_pivot = 1;
  const std::size_t n_rows = a.size();
  for (std::size_t col = 0; col < cols && rank < n_rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < n_rows && a[pivot][col] == 0) ++pivot;
    if (pivot == n_rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < n_rows; ++r) {
      for (std::size_t c = col + 1; c < cols; ++c) {
        a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]);
        mpz_divexact(a[r][c].get_mpz_t(), a[r][c].get_mpz_t(), prev_pivot.get_mpz_t());
      }
      a[r][col] = 0;
    }
    prev_pivot = a[rank][col];
    ++rank;
  }
  return rank;
}

namespace {

// Solves the square system m x = b in place by Gauss-Jordan over Q.
RationalMatrix gauss_jordan(RationalMatrix m, RationalMatrix rhs) {
  const std::size_t n = m.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) throw PreconditionError("singular rational matrix");
    std::swap(m[pivot], m[col]);
    std::swap(rhs[pivot], rhs[col]);
    Rational inv = 1 / m[col][col];
    for (auto& x : m[col]) x *= inv;
    for (auto& x : rhs[col]) x *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t c = 0; c < n; ++c) m[r][c] -= f * m[col][c];
      for (std::size_t c = 0; c < rhs[r].size(); ++c) rhs[r][c] -= f * rhs[col][c];
    }
  }
  return rhs;
}

}  // namespace

RationalMatrix exact_inverse(const RationalMatrix& m) {
  const std::size_t n = m.size();
  RationalMatrix id(n, RationalVector(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].size() != n) throw DimensionError("exact_inverse: matrix not square");
    id[i][i] = 1;
  }
  return gauss_jordan(m, id);
}

RationalVector exact_residual(const RationalMatrix& span_rows, const RationalVector& w) {
  const std::size_t k = span_rows.size();
  if (k == 0) return w;
  RationalMatrix gram(k, RationalVector(k));
  RationalMatrix rhs(k, RationalVector(1));
  for (std::size_t a = 0; a < k; ++a) {
    if (span_rows[a].size() != w.size()) throw DimensionError("exact_residual: length mismatch");
    for (std::size_t b = 0; b < k; ++b) {
      Rational s = 0;
      for (std::size_t i = 0; i < w.size(); ++i) s += span_rows[a][i] * span_rows[b][i];
      gram[a][b] = s;
    }
    Rational s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += span_rows[a][i] * w[i];
    rhs[a][0] = s;
  }
  RationalMatrix coef = gauss_jordan(gram, rhs);
  RationalVector res = w;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < w.size(); ++i) res[i] -= coef[a][0] * span_rows[a][i];
  return res;
}

}  // namespace carnot
