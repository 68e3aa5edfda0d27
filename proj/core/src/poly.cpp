#include "nonconc/poly.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "nonconc/error.hpp"

namespace nonconc {

// ---- Monomial ------------------------------------------------------------

Monomial::Monomial(std::span<const unsigned> exponents) {
  require(exponents.size() <= kMaxVars, "monomial has more than " + std::to_string(kMaxVars) + " variables");
  unsigned total = 0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    require(exponents[i] <= kMaxExponent, "exponent exceeds " + std::to_string(kMaxExponent));
    exps_[i] = static_cast<std::uint8_t>(exponents[i]);
    total += exponents[i];
  }
  degree_ = static_cast<std::uint16_t>(total);
}

Monomial Monomial::unit(std::size_t var, unsigned power) {
  Monomial m;
  m.set(var, power);
  return m;
}

void Monomial::set(std::size_t i, unsigned value) {
  require(i < kMaxVars, "variable index out of range");
  require(value <= kMaxExponent, "exponent exceeds " + std::to_string(kMaxExponent));
  degree_ = static_cast<std::uint16_t>(degree_ - exps_[i] + value);
  exps_[i] = static_cast<std::uint8_t>(value);
}

bool Monomial::divides(const Monomial& other) const {
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (exps_[i] > other.exps_[i]) return false;
  return true;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial r;
  for (std::size_t i = 0; i < kMaxVars; ++i) {
    unsigned e = unsigned(exps_[i]) + other.exps_[i];
    if (e > kMaxExponent) throw DomainError("exponent overflow in monomial product");
    r.exps_[i] = static_cast<std::uint8_t>(e);
  }
  r.degree_ = static_cast<std::uint16_t>(degree_ + other.degree_);
  return r;
}

Monomial Monomial::operator/(const Monomial& divisor) const {
  Monomial r;
  for (std::size_t i = 0; i < kMaxVars; ++i) r.exps_[i] = static_cast<std::uint8_t>(exps_[i] - divisor.exps_[i]);
  r.degree_ = static_cast<std::uint16_t>(degree_ - divisor.degree_);
  return r;
}

std::vector<unsigned> Monomial::exponents(std::size_t nvars) const {
  return std::vector<unsigned>(exps_.begin(), exps_.begin() + static_cast<std::ptrdiff_t>(nvars));
}

std::size_t Monomial::support_size() const {
  for (std::size_t i = kMaxVars; i > 0; --i)
    if (exps_[i - 1]) return i;
  return 0;
}

std::size_t Monomial::hash() const {
  std::uint64_t words[kMaxVars / 8];
  std::memcpy(words, exps_.data(), kMaxVars);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t w : words) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
  if (a.degree_ != b.degree_) return a.degree_ <=> b.degree_;
  int c = std::memcmp(a.exps_.data(), b.exps_.data(), kMaxVars);
  return c <=> 0;
}

// ---- Polynomial ----------------------------------------------------------

namespace {

void check_nvars(std::size_t n) {
  require(n <= kMaxVars, "polynomial has more than " + std::to_string(kMaxVars) + " variables");
}

void check_same(const Polynomial& a, const Polynomial& b, const char* op) {
  if (a.nvars() != b.nvars())
    throw ValidationError(std::string(op) + ": variable-count mismatch (" + std::to_string(a.nvars()) + " vs " +
                          std::to_string(b.nvars()) + ")");
}

bool term_desc(const Polynomial::Term& a, const Polynomial::Term& b) { return a.first > b.first; }

}  // namespace

Polynomial::Polynomial(std::size_t nvars) : nvars_(nvars) { check_nvars(nvars); }

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
  Polynomial p(nvars);
  if (sgn(c) != 0) p.terms_.emplace_back(Monomial{}, c);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t var) {
  require(var < nvars, "variable index out of range");
  Polynomial p(nvars);
  p.terms_.emplace_back(Monomial::unit(var), Rational(1));
  return p;
}

Polynomial Polynomial::monomial(std::size_t nvars, const Monomial& m, const Rational& c) {
  require(m.support_size() <= nvars, "monomial uses variables beyond the variable count");
  Polynomial p(nvars);
  if (sgn(c) != 0) p.terms_.emplace_back(m, c);
  return p;
}

Polynomial Polynomial::from_terms(std::size_t nvars, std::vector<Term> terms) {
  PolyAccumulator acc(nvars);
  for (auto& [m, c] : terms) {
    require(m.support_size() <= nvars, "monomial uses variables beyond the variable count");
    acc.add(m, c);
  }
  return std::move(acc).finish();
}

bool Polynomial::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.degree() == 0); }

std::optional<unsigned> Polynomial::degree() const {
  if (terms_.empty()) return std::nullopt;
  return terms_.front().first.degree();  // leading term in graded order
}

unsigned Polynomial::degree_in(std::size_t var) const {
  require(var < nvars_, "variable index out of range");
  unsigned d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
  return d;
}

Rational Polynomial::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Monomial& key) { return t.first > key; });
  if (it != terms_.end() && it->first == m) return it->second;
  return 0;
}

Rational Polynomial::constant_term() const { return coefficient(Monomial{}); }

std::vector<std::size_t> Polynomial::used_variables() const {
  std::vector<bool> used(nvars_, false);
  for (const auto& [m, c] : terms_)
    for (std::size_t i = 0; i < nvars_; ++i)
      if (m[i]) used[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nvars_; ++i)
    if (used[i]) out.push_back(i);
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same(*this, o, "add");
  if (o.terms_.empty()) return *this;
  std::vector<Term> out;
  out.reserve(terms_.size() + o.terms_.size());
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  while (a != terms_.end() || b != o.terms_.end()) {
    if (b == o.terms_.end() || (a != terms_.end() && a->first > b->first)) {
      out.push_back(std::move(*a++));
    } else if (a == terms_.end() || b->first > a->first) {
      out.push_back(*b++);
    } else {
      Rational c = a->second + b->second;
      if (sgn(c) != 0) out.emplace_back(a->first, std::move(c));
      ++a;
      ++b;
    }
  }
  terms_ = std::move(out);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) { return *this += -o; }

Polynomial& Polynomial::operator*=(const Polynomial& o) {
  *this = *this * o;
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  check_same(a, b, "mul");
  if (a.is_zero() || b.is_zero()) return Polynomial(a.nvars());
  if (b.is_constant()) return a * b.terms_[0].second;
  if (a.is_constant()) return b * a.terms_[0].second;
  PolyAccumulator acc(a.nvars());
  acc.add_product(a, b);
  return std::move(acc).finish();
}

Polynomial operator-(Polynomial a) {
  for (auto& t : a.terms_) t.second = -t.second;
  return a;
}

bool operator==(const Polynomial& a, const Polynomial& b) { return a.nvars_ == b.nvars_ && a.terms_ == b.terms_; }

// ---- PolyAccumulator -----------------------------------------------------

void PolyAccumulator::add(const Monomial& m, const Rational& c) {
  if (sgn(c) == 0) return;
  auto [it, inserted] = acc_.try_emplace(m, c);
  if (!inserted) it->second += c;
}

void PolyAccumulator::add(const Polynomial& p, const Rational& scale) {
  require(p.nvars() == nvars_, "accumulator: variable-count mismatch");
  if (sgn(scale) == 0) return;
  bool unit = scale == 1;
  for (const auto& [m, c] : p.terms()) add(m, unit ? c : Rational(c * scale));
}

void PolyAccumulator::add_product(const Polynomial& a, const Polynomial& b, const Rational& scale) {
  require(a.nvars() == nvars_ && b.nvars() == nvars_, "accumulator: variable-count mismatch");
  if (sgn(scale) == 0) return;
  acc_.reserve(acc_.size() + a.size() * b.size());
  bool unit = scale == 1;
  Rational prod;
  for (const auto& [ma, ca] : a.terms()) {
    Rational cs = unit ? ca : Rational(ca * scale);
    for (const auto& [mb, cb] : b.terms()) {
      mpq_mul(prod.get_mpq_t(), cs.get_mpq_t(), cb.get_mpq_t());
      add(ma * mb, prod);
    }
  }
}

Polynomial PolyAccumulator::finish() && {
  Polynomial p(nvars_);
  p.terms_.reserve(acc_.size());
  for (auto& [m, c] : acc_)
    if (sgn(c) != 0) p.terms_.emplace_back(m, std::move(c));
  std::sort(p.terms_.begin(), p.terms_.end(), term_desc);
  acc_.clear();
  return p;
}

// ---- Free operations -----------------------------------------------------

Polynomial add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial mul(const Polynomial& p, const Polynomial& q) { return p * q; }

Polynomial pow(const Polynomial& p, unsigned e) {
  Polynomial result = Polynomial::constant(p.nvars(), 1);
  Polynomial base = p;
  while (e) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

Polynomial partial(const Polynomial& p, std::size_t var) {
  require(var < p.nvars(), "partial: variable index " + std::to_string(var) + " out of range");
  std::vector<Polynomial::Term> out;
  for (const auto& [m, c] : p.terms()) {
    unsigned e = m[var];
    if (e == 0) continue;
    Monomial d = m;
    d.set(var, e - 1);
    out.emplace_back(d, c * e);
  }
  // Differentiation in one variable can reorder terms within a degree, so
  // rebuild canonically.
  return Polynomial::from_terms(p.nvars(), std::move(out));
}

Polynomial partial(const Polynomial& p, std::span<const unsigned> alpha) {
  require(alpha.size() == p.nvars(), "partial: multiindex length mismatch");
  std::vector<Polynomial::Term> out;
  for (const auto& [m, c] : p.terms()) {
    Monomial d = m;
    Rational coef = c;
    bool vanishes = false;
    for (std::size_t i = 0; i < alpha.size() && !vanishes; ++i) {
      unsigned e = m[i];
      if (alpha[i] > e) {
        vanishes = true;
        break;
      }
      for (unsigned j = 0; j < alpha[i]; ++j) coef *= (e - j);
      d.set(i, e - alpha[i]);
    }
    if (!vanishes) out.emplace_back(d, std::move(coef));
  }
  return Polynomial::from_terms(p.nvars(), std::move(out));
}

Polynomial homogeneous_part(const Polynomial& p, unsigned d) {
  std::vector<Polynomial::Term> out;
  for (const auto& t : p.terms())
    if (t.first.degree() == d) out.push_back(t);
  return Polynomial::from_terms(p.nvars(), std::move(out));
}

Polynomial compose(const Polynomial& p, std::span<const Polynomial> subs) {
  require(subs.size() == p.nvars(), "compose: need one substitute per variable");
  const std::size_t out_n = subs.empty() ? 0 : subs[0].nvars();
  for (const auto& s : subs) require(s.nvars() == out_n, "compose: substitutes must share a variable count");
  if (p.is_zero()) return Polynomial(out_n);
  // powers[i][e] = subs[i]^e, filled lazily.
  std::vector<std::vector<Polynomial>> powers(subs.size());
  auto power = [&](std::size_t i, unsigned e) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) {
      cache.push_back(Polynomial::constant(out_n, 1));
      cache.push_back(subs[i]);
    }
    while (cache.size() <= e) cache.push_back(cache.back() * subs[i]);
    return cache[e];
  };
  PolyAccumulator acc(out_n);
  for (const auto& [m, c] : p.terms()) {
    Polynomial prod = Polynomial::constant(out_n, c);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (m[i] == 0) continue;
      prod = prod * power(i, m[i]);
      if (prod.is_zero()) break;
    }
    acc.add(prod);
  }
  return std::move(acc).finish();
}

Polynomial compose_linear(const Polynomial& p, const RationalMatrix& T, std::size_t offset) {
  const std::size_t n = T.size();
  for (const auto& row : T) require(row.size() == n, "compose_linear: matrix is not square");
  require(offset + n <= p.nvars(), "compose_linear: block exceeds variable count");
  std::vector<Polynomial> subs;
  subs.reserve(p.nvars());
  for (std::size_t v = 0; v < p.nvars(); ++v) {
    if (v < offset || v >= offset + n) {
      subs.push_back(Polynomial::variable(p.nvars(), v));
      continue;
    }
    std::vector<Polynomial::Term> terms;
    const auto& row = T[v - offset];
    for (std::size_t j = 0; j < n; ++j)
      if (sgn(row[j]) != 0) terms.emplace_back(Monomial::unit(offset + j), row[j]);
    subs.push_back(Polynomial::from_terms(p.nvars(), std::move(terms)));
  }
  return compose(p, subs);
}

Polynomial translate(const Polynomial& p, std::span<const Rational> shift) {
  require(shift.size() == p.nvars(), "translate: shift length mismatch");
  std::vector<Polynomial> subs;
  subs.reserve(p.nvars());
  for (std::size_t v = 0; v < p.nvars(); ++v)
    subs.push_back(Polynomial::variable(p.nvars(), v) + Polynomial::constant(p.nvars(), shift[v]));
  return compose(p, subs);
}

Polynomial embed(const Polynomial& p, std::size_t new_nvars, std::span<const std::size_t> var_map) {
  require(var_map.size() == p.nvars(), "embed: map length mismatch");
  for (auto v : var_map) require(v < new_nvars, "embed: target index out of range");
  std::vector<Polynomial::Term> out;
  out.reserve(p.size());
  for (const auto& [m, c] : p.terms()) {
    Monomial r;
    for (std::size_t i = 0; i < p.nvars(); ++i)
      if (m[i]) r.set(var_map[i], r[var_map[i]] + m[i]);
    out.emplace_back(r, c);
  }
  return Polynomial::from_terms(new_nvars, std::move(out));
}

Polynomial specialize(const Polynomial& p, std::span<const std::size_t> vars, std::span<const Rational> values) {
  require(vars.size() == values.size(), "specialize: vars/values length mismatch");
  std::vector<int> fixed(p.nvars(), -1);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    require(vars[i] < p.nvars(), "specialize: variable index out of range");
    fixed[vars[i]] = static_cast<int>(i);
  }
  std::vector<std::size_t> new_index(p.nvars(), 0);
  std::size_t remaining = 0;
  for (std::size_t v = 0; v < p.nvars(); ++v)
    if (fixed[v] < 0) new_index[v] = remaining++;
  PolyAccumulator acc(remaining);
  for (const auto& [m, c] : p.terms()) {
    Rational coef = c;
    Monomial r;
    for (std::size_t v = 0; v < p.nvars(); ++v) {
      if (!m[v]) continue;
      if (fixed[v] >= 0) {
        Rational f;
        mpz_pow_ui(f.get_num_mpz_t(), values[fixed[v]].get_num_mpz_t(), m[v]);
        mpz_pow_ui(f.get_den_mpz_t(), values[fixed[v]].get_den_mpz_t(), m[v]);
        coef *= f;
      } else {
        r.set(new_index[v], m[v]);
      }
    }
    acc.add(r, coef);
  }
  return std::move(acc).finish();
}

Rational eval(const Polynomial& p, std::span<const Rational> point) {
  require(point.size() == p.nvars(), "eval: point length mismatch");
  Rational sum = 0;
  Rational term;
  Rational f;
  for (const auto& [m, c] : p.terms()) {
    term = c;
    for (std::size_t i = 0; i < point.size(); ++i) {
      if (!m[i]) continue;
      mpz_pow_ui(f.get_num_mpz_t(), point[i].get_num_mpz_t(), m[i]);
      mpz_pow_ui(f.get_den_mpz_t(), point[i].get_den_mpz_t(), m[i]);
      term *= f;
    }
    sum += term;
  }
  return sum;
}

double eval_f64(const Polynomial& p, std::span<const double> point) {
  require(point.size() == p.nvars(), "eval_f64: point length mismatch");
  double sum = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double term = to_double(c);
    for (std::size_t i = 0; i < point.size(); ++i)
      for (unsigned e = 0; e < m[i]; ++e) term *= point[i];
    sum += term;
  }
  return sum;
}

Polynomial divide_exact(const Polynomial& p, const Polynomial& divisor) {
  check_same(p, divisor, "divide_exact");
  if (divisor.is_zero()) throw DomainError("divide_exact: division by zero polynomial");
  if (divisor.is_constant()) {
    Rational inv = 1 / divisor.terms()[0].second;
    return p * inv;
  }
  const auto& [lm, lc] = divisor.terms()[0];
  Polynomial rem = p;
  PolyAccumulator quot(p.nvars());
  while (!rem.is_zero()) {
    const auto& [m, c] = rem.terms()[0];
    if (!lm.divides(m)) throw DomainError("divide_exact: divisor does not divide polynomial");
    Monomial qm = m / lm;
    Rational qc = c / lc;
    quot.add(qm, qc);
    rem -= divisor * Polynomial::monomial(p.nvars(), qm, qc);
  }
  return std::move(quot).finish();
}

namespace {

void check_square(const PolyMatrix& m, const char* who) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw ValidationError(std::string(who) + ": matrix is not square");
}

std::size_t matrix_nvars(const PolyMatrix& m) {
  std::size_t nv = m.empty() || m[0].empty() ? 0 : m[0][0].nvars();
  for (const auto& row : m)
    for (const auto& e : row) require(e.nvars() == nv, "determinant: entries must share a variable count");
  return nv;
}

}  // namespace

Polynomial det_cofactor(const PolyMatrix& m) {
  check_square(m, "det_cofactor");
  const std::size_t n = m.size();
  const std::size_t nv = matrix_nvars(m);
  if (n == 0) return Polynomial::constant(nv, 1);
  require(n <= 64, "det_cofactor: matrix larger than 64");
  // layer[mask] = signed sum over injective assignments of the first c columns
  // to the rows in mask.
  std::map<std::uint64_t, Polynomial> layer;
  layer.emplace(0, Polynomial::constant(nv, 1));
  for (std::size_t col = 0; col < n; ++col) {
    std::map<std::uint64_t, PolyAccumulator> next;
    for (const auto& [mask, val] : layer) {
      for (std::size_t row = 0; row < n; ++row) {
        std::uint64_t bit = std::uint64_t{1} << row;
        if ((mask & bit) || m[row][col].is_zero()) continue;
        // Inversions added: previously used rows above this one.
        std::uint64_t above = row + 1 >= 64 ? 0 : (mask >> (row + 1));
        int sign = (std::popcount(above) & 1) ? -1 : 1;
        auto it = next.try_emplace(mask | bit, nv).first;
        it->second.add_product(val, m[row][col], Rational(sign));
      }
    }
    layer.clear();
    for (auto& [mask, acc] : next) {
      Polynomial p = std::move(acc).finish();
      if (!p.is_zero()) layer.emplace(mask, std::move(p));
    }
    if (layer.empty()) return Polynomial(nv);
  }
  return layer.begin()->second;
}

Polynomial det_bareiss(const PolyMatrix& input) {
  check_square(input, "det_bareiss");
  const std::size_t n = input.size();
  const std::size_t nv = matrix_nvars(input);
  if (n == 0) return Polynomial::constant(nv, 1);
  PolyMatrix a = input;
  Polynomial prev = Polynomial::constant(nv, 1);
  bool negate = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k].is_zero()) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k].is_zero()) ++swap_row;
      if (swap_row == n) return Polynomial(nv);
      std::swap(a[k], a[swap_row]);
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Polynomial num = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        a[i][j] = divide_exact(num, prev);
      }
      a[i][k] = Polynomial(nv);
    }
    prev = a[k][k];
  }
  Polynomial d = a[n - 1][n - 1];
  return negate ? -d : d;
}

Polynomial det_poly_matrix(const PolyMatrix& m) {
  check_square(m, "det_poly_matrix");
  return m.size() <= 6 ? det_cofactor(m) : det_bareiss(m);
}

// ---- PolyVector ----------------------------------------------------------

PolyVector::PolyVector(std::vector<Polynomial> components) : comps_(std::move(components)) {
  require(!comps_.empty(), "PolyVector must be nonempty");
  for (const auto& c : comps_) require(c.nvars() == comps_.front().nvars(), "PolyVector components must share a variable count");
}

bool PolyVector::is_zero() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const Polynomial& p) { return p.is_zero(); });
}

std::optional<unsigned> PolyVector::degree() const {
  std::optional<unsigned> d;
  for (const auto& c : comps_) {
    auto cd = c.degree();
    if (cd && (!d || *cd > *d)) d = cd;
  }
  return d;
}

// ---- Formatting ----------------------------------------------------------

std::string to_string(const Polynomial& p, std::span<const std::string> names) {
  if (p.is_zero()) return "0";
  auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "x" + std::to_string(i); };
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational mag = abs(c);
    if (first) {
      if (sgn(c) < 0) out << "-";
    } else {
      out << (sgn(c) < 0 ? " - " : " + ");
    }
    first = false;
    bool wrote = false;
    if (mag != 1 || m.degree() == 0) {
      out << to_string(mag);
      wrote = true;
    }
    for (std::size_t i = 0; i < p.nvars(); ++i) {
      if (!m[i]) continue;
      if (wrote) out << "*";
      out << name(i);
      if (m[i] > 1) out << "^" << m[i];
      wrote = true;
    }
  }
  return out.str();
}

Rational multiindex_factorial(std::span<const unsigned> alpha) {
  mpz_class f = 1;
  for (unsigned a : alpha) {
    mpz_class fa;
    mpz_fac_ui(fa.get_mpz_t(), a);
    f *= fa;
  }
  return Rational(f);
}

}  // namespace nonconc
