#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace carnot {

/// Arbitrary-precision rational. GMP keeps it reduced with a positive denominator.
using Rational = mpq_class;
using RationalVector = std::vector<Rational>;
/// Row-major dense rational matrix.
using RationalMatrix = std::vector<RationalVector>;

/// Parses "3", "-1/12", "0.25" or "1e-3" exactly.
Rational parse_rational(const std::string& text);

/// "n" or "n/d".
std::string to_string(const Rational& r);

inline double to_double(const Rational& r) { return r.get_d(); }

/// Best rational approximation with denominator <= max_den (continued fractions).
/// Returns nullopt if the approximation error exceeds tol.
std::optional<Rational> rationalize(double value, long max_den = 1000000, double tol = 1e-12);

/// Rank by fraction-free (Bareiss) elimination after clearing denominators row by row.
std::size_t exact_rank(const RationalMatrix& rows);

/// Exact solve of the normal equations: orthogonal residual of w against span(rows).
RationalVector exact_residual(const RationalMatrix& span_rows, const RationalVector& w);

/// Exact inverse of a square matrix; throws PreconditionError when singular.
RationalMatrix exact_inverse(const RationalMatrix& m);

}  // namespace carnot
