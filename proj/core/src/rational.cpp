#include "nonconc/rational.hpp"

#include <cctype>
#include <cmath>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Rational pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  const std::string original(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw ValidationError("invalid rational literal '" + original + "'");
    mpz_class d(std::string(den), 10);
    if (d == 0) throw ValidationError("zero denominator in '" + original + "'");
    value = Rational(mpz_class(std::string(num), 10), d);
    value.canonicalize();
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      auto tail = s.substr(e + 1);
      bool eneg = false;
      if (!tail.empty() && (tail.front() == '-' || tail.front() == '+')) {
        eneg = tail.front() == '-';
        tail.remove_prefix(1);
      }
      if (!all_digits(tail) || tail.size() > 6)
        throw ValidationError("invalid exponent in '" + original + "'");
      exponent = std::stol(std::string(tail));
      if (eneg) exponent = -exponent;
      s = s.substr(0, e);
    }
    std::string digits;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      auto ip = s.substr(0, dot);
      auto fp = s.substr(dot + 1);
      if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) || (ip.empty() && fp.empty()))
        throw ValidationError("invalid decimal literal '" + original + "'");
      digits = std::string(ip) + std::string(fp);
      exponent -= static_cast<long>(fp.size());
    } else {
      if (!all_digits(s)) throw ValidationError("invalid number '" + original + "'");
      digits = std::string(s);
    }
    value = Rational(mpz_class(digits, 10)) * pow10(exponent);
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw ValidationError("non-finite value cannot be made rational");
  Rational r(v);  // mpq_set_d is exact
  return r;
}

double to_double(const Rational& r) {
  // mpq_get_d truncates; dividing two correctly rounded doubles is closer for
  // moderate sizes, fall back to GMP when the parts overflow.
  double n = r.get_num().get_d();
  double d = r.get_den().get_d();
  if (std::isfinite(n) && std::isfinite(d) && std::abs(n) < 9.007199254740992e15 && d < 9.007199254740992e15)
    return n / d;
  return r.get_d();
}

RationalMatrix identity_matrix(std::size_t n) {
  RationalMatrix m(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

RationalMatrix matmul(const RationalMatrix& a, const RationalMatrix& b) {
  const std::size_t n = a.size();
  const std::size_t inner = b.size();
  const std::size_t m = inner ? b[0].size() : 0;
  for (const auto& row : a) require(row.size() == inner, "matmul: inner dimension mismatch");
  RationalMatrix c(n, std::vector<Rational>(m, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < inner; ++l) {
      if (sgn(a[i][l]) == 0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    }
  return c;
}

Rational determinant(RationalMatrix m) {
  const std::size_t n = m.size();
  for (const auto& row : m) require(row.size() == n, "determinant: matrix is not square");
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && sgn(m[pivot][col]) == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t i = col + 1; i < n; ++i) {
      if (sgn(m[i][col]) == 0) continue;
      Rational f = m[i][col] / m[col][col];
      for (std::size_t j = col; j < n; ++j) m[i][j] -= f * m[col][j];
    }
  }
  return det;
}

RationalMatrix inverse(const RationalMatrix& m) {
  const std::size_t n = m.size();
  for (const auto& row : m) require(row.size() == n, "inverse: matrix is not square");
  RationalMatrix a = m;
  RationalMatrix inv = identity_matrix(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && sgn(a[pivot][col]) == 0) ++pivot;
    if (pivot == n) throw DomainError("inverse: singular matrix");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    Rational p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || sgn(a[i][col]) == 0) continue;
      Rational f = a[i][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] -= f * a[col][j];
        inv[i][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

}  // namespace nonconc
