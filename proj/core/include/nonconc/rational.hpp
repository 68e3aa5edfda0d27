#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace nonconc {

// Exact rational, always canonical (reduced, positive denominator).
using Rational = mpq_class;

// Accepts "p", "p/q", and decimal forms such as "-1.25" or "3e-2".
// Decimals are converted exactly (0.1 becomes 1/10).
Rational parse_rational(std::string_view text);

// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

// Exact binary value of a finite double.
Rational rational_from_double(double v);

double to_double(const Rational& r);

using RationalMatrix = std::vector<std::vector<Rational>>;

RationalMatrix identity_matrix(std::size_t n);
RationalMatrix matmul(const RationalMatrix& a, const RationalMatrix& b);
Rational determinant(RationalMatrix m);
// Throws DomainError when singular.
RationalMatrix inverse(const RationalMatrix& m);

}  // namespace nonconc
