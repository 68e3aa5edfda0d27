#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nonconc/rational.hpp"

namespace nonconc {

// Upper bound on the ambient variable count of any polynomial. Exponents are
// stored inline so monomials are cheap to copy, hash and compare.
inline constexpr std::size_t kMaxVars = 32;
inline constexpr unsigned kMaxExponent = 255;

class Monomial {
public:
  Monomial() = default;
  explicit Monomial(std::span<const unsigned> exponents);

  static Monomial unit(std::size_t var, unsigned power = 1);

  unsigned operator[](std::size_t i) const { return exps_[i]; }
  unsigned degree() const { return degree_; }
  void set(std::size_t i, unsigned value);

  bool divides(const Monomial& other) const;
  Monomial operator*(const Monomial& other) const;
  // Requires divisor.divides(*this).
  Monomial operator/(const Monomial& divisor) const;

  std::vector<unsigned> exponents(std::size_t nvars) const;
  // Highest index with a nonzero exponent plus one.
  std::size_t support_size() const;
  std::size_t hash() const;

  friend bool operator==(const Monomial&, const Monomial&) = default;
  // Graded lexicographic: total degree first, then x0 > x1 > ...
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b);

private:
  std::array<std::uint8_t, kMaxVars> exps_{};
  std::uint16_t degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

class Polynomial {
public:
  using Term = std::pair<Monomial, Rational>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars);

  static Polynomial constant(std::size_t nvars, const Rational& c);
  static Polynomial variable(std::size_t nvars, std::size_t var);
  static Polynomial monomial(std::size_t nvars, const Monomial& m, const Rational& c);
  // Combines duplicate monomials and drops zeros.
  static Polynomial from_terms(std::size_t nvars, std::vector<Term> terms);

  std::size_t nvars() const { return nvars_; }
  // Canonical order: descending graded lexicographic.
  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // nullopt is the degree of the zero polynomial.
  std::optional<unsigned> degree() const;
  unsigned degree_in(std::size_t var) const;
  Rational coefficient(const Monomial& m) const;
  Rational constant_term() const;
  // Indices of variables that actually occur.
  std::vector<std::size_t> used_variables() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Polynomial& o);
  Polynomial& operator*=(const Rational& c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend Polynomial operator-(Polynomial a);
  friend bool operator==(const Polynomial& a, const Polynomial& b);

private:
  friend class PolyAccumulator;
  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

// Hash-based sum of many terms; cheaper than repeated sorted merges.
class PolyAccumulator {
public:
  explicit PolyAccumulator(std::size_t nvars) : nvars_(nvars) {}
  void add(const Monomial& m, const Rational& c);
  void add(const Polynomial& p, const Rational& scale = Rational(1));
  // Adds scale * a * b.
  void add_product(const Polynomial& a, const Polynomial& b, const Rational& scale = Rational(1));
  Polynomial finish() &&;

private:
  std::size_t nvars_;
  std::unordered_map<Monomial, Rational, MonomialHash> acc_;
};

Polynomial add(const Polynomial& p, const Polynomial& q);
Polynomial mul(const Polynomial& p, const Polynomial& q);
Polynomial pow(const Polynomial& p, unsigned e);
Polynomial partial(const Polynomial& p, std::size_t var);
// Iterated partial derivative d^alpha (alpha has one entry per variable).
Polynomial partial(const Polynomial& p, std::span<const unsigned> alpha);
// Part of total degree exactly d.
Polynomial homogeneous_part(const Polynomial& p, unsigned d);

// Substitutes variable i by subs[i]; all subs share one variable count,
// which becomes the result's.
Polynomial compose(const Polynomial& p, std::span<const Polynomial> subs);
// Substitutes the block x[offset .. offset+n) by T * x_block (x |-> T x on
// the block); other variables are left untouched.
Polynomial compose_linear(const Polynomial& p, const RationalMatrix& T, std::size_t offset);
// Substitutes x_i by x_i + shift_i.
Polynomial translate(const Polynomial& p, std::span<const Rational> shift);
// Reindexes into new_nvars variables; variable i becomes var_map[i].
Polynomial embed(const Polynomial& p, std::size_t new_nvars, std::span<const std::size_t> var_map);
// Fixes the listed variables to values and removes them. Remaining variables
// keep their relative order.
Polynomial specialize(const Polynomial& p, std::span<const std::size_t> vars, std::span<const Rational> values);

Rational eval(const Polynomial& p, std::span<const Rational> point);
// Each coefficient is rounded to the nearest double once, monomials are formed
// by repeated multiplication and terms are summed in canonical order without
// compensation. The relative error is a small multiple of the unit roundoff
// times the condition number sum|c_a x^a| / |p(x)|.
double eval_f64(const Polynomial& p, std::span<const double> point);

// Exact division; throws DomainError when divisor does not divide p.
Polynomial divide_exact(const Polynomial& p, const Polynomial& divisor);

using PolyMatrix = std::vector<std::vector<Polynomial>>;

// Column-by-column Laplace expansion memoised over row subsets. Skips zero
// entries, so block-sparse matrices stay cheap. Size limited to 64.
Polynomial det_cofactor(const PolyMatrix& m);
// Fraction-free Bareiss elimination with exact polynomial division.
Polynomial det_bareiss(const PolyMatrix& m);
// Cofactor expansion up to size 6, Bareiss beyond.
Polynomial det_poly_matrix(const PolyMatrix& m);

// Ordered list of polynomials sharing one variable count.
class PolyVector {
public:
  PolyVector() = default;
  explicit PolyVector(std::vector<Polynomial> components);

  std::size_t size() const { return comps_.size(); }
  std::size_t nvars() const { return comps_.empty() ? 0 : comps_.front().nvars(); }
  const Polynomial& operator[](std::size_t i) const { return comps_[i]; }
  std::span<const Polynomial> components() const { return comps_; }
  bool is_zero() const;
  std::optional<unsigned> degree() const;

  friend bool operator==(const PolyVector&, const PolyVector&) = default;

private:
  std::vector<Polynomial> comps_;
};

// Human-readable form using the given variable names (x0, x1, ... if empty).
std::string to_string(const Polynomial& p, std::span<const std::string> names = {});

// alpha! = prod_i alpha_i!
Rational multiindex_factorial(std::span<const unsigned> alpha);

}  // namespace nonconc
