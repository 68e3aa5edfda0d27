#include <doctest.h>

#include <map>
#include <random>

#include "nonconc/error.hpp"
#include "nonconc/parse.hpp"
#include "nonconc/poly.hpp"
#include "random_poly.hpp"

using namespace nonconc;
using nonconc::testing::random_matrix;
using nonconc::testing::random_nonzero_poly;
using nonconc::testing::random_point;
using nonconc::testing::random_poly;

namespace {

const std::vector<std::string> kXY{"x", "y"};

Polynomial P(const char* text, const std::vector<std::string>& vars = kXY) { return parse_polynomial(text, vars); }

// Schoolbook product over exponent vectors, independent of the hash-based
// accumulator used by the library.
std::map<std::vector<unsigned>, Rational> naive_product(const Polynomial& a, const Polynomial& b) {
  std::map<std::vector<unsigned>, Rational> out;
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      std::vector<unsigned> e(a.nvars());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ma[i] + mb[i];
      out[e] += ca * cb;
    }
  for (auto it = out.begin(); it != out.end();) it = sgn(it->second) == 0 ? out.erase(it) : std::next(it);
  return out;
}

// (T^* d)_i = sum_j T[j][i] d_j applied alpha_i times each.
Polynomial directional_oracle(const Polynomial& p, const RationalMatrix& T, const std::vector<unsigned>& alpha) {
  Polynomial cur = p;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (unsigned rep = 0; rep < alpha[i]; ++rep) {
      Polynomial next(p.nvars());
      for (std::size_t j = 0; j < T.size(); ++j)
        if (sgn(T[j][i]) != 0) next += partial(cur, j) * T[j][i];
      cur = next;
    }
  return cur;
}

std::vector<Rational> matvec(const RationalMatrix& T, const std::vector<Rational>& y) {
  std::vector<Rational> out(T.size(), Rational(0));
  for (std::size_t i = 0; i < T.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out[i] += T[i][j] * y[j];
  return out;
}

}  // namespace

TEST_CASE("rational parsing is exact") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("-0.25") == Rational(-1, 4));
  CHECK(parse_rational("1e-3") == Rational(1, 1000));
  CHECK(parse_rational("12") == 12);
  CHECK(to_string(parse_rational("-4/6")) == "-2/3");
  CHECK(to_string(Rational(0)) == "0");
  CHECK_THROWS_AS(parse_rational("1/0"), ValidationError);
  CHECK_THROWS_AS(parse_rational("abc"), ValidationError);
}

TEST_CASE("add: cancellation, identity, inverse") {
  CHECK(P("x+y") + P("x-y") == P("2*x"));
  Polynomial p = P("x^2*y - 3/4*y + 1");
  CHECK(p + Polynomial(2) == p);
  CHECK((P("x^2") + P("-x^2")).is_zero());
  CHECK_FALSE(P("x^2").is_zero());
  CHECK_THROWS_AS(add(Polynomial(2), Polynomial(3)), ValidationError);
}

TEST_CASE("zero polynomial degree is a sentinel") {
  CHECK_FALSE(Polynomial(3).degree().has_value());
  CHECK(Polynomial::constant(3, 5).degree() == 0u);
  CHECK(P("x^2*y + y").degree() == 3u);
}

TEST_CASE("mul: examples and degree additivity against a naive convolution") {
  CHECK(P("x+y") * P("x-y") == P("x^2-y^2"));
  Polynomial p = P("2*x*y^3 - x + 7/3");
  CHECK(p * Polynomial::constant(2, 1) == p);
  CHECK_THROWS_AS(mul(Polynomial(2), Polynomial(1)), ValidationError);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_nonzero_poly(rng, 3, 4, 6);
    auto b = random_nonzero_poly(rng, 3, 4, 6);
    auto prod = a * b;
    CHECK(*prod.degree() == *a.degree() + *b.degree());
    auto oracle = naive_product(a, b);
    REQUIRE(oracle.size() == prod.size());
    for (const auto& [m, c] : prod.terms()) CHECK(oracle.at(m.exponents(3)) == c);
  }
}

TEST_CASE("partial: examples and symmetry of mixed partials") {
  CHECK(partial(P("x^2*y"), 0) == P("2*x*y"));
  CHECK(partial(P("x^2"), 1).is_zero());
  CHECK_THROWS_AS(partial(P("x"), 2), ValidationError);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_poly(rng, 3, 5, 8);
    CHECK(partial(partial(p, 0), 1) == partial(partial(p, 1), 0));
    std::vector<unsigned> alpha{1, 1, 0};
    CHECK(partial(p, alpha) == partial(partial(p, 0), 1));
  }
}

TEST_CASE("partial is linear and satisfies Leibniz") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = random_poly(rng, 3, 4, 6);
    auto q = random_poly(rng, 3, 4, 6);
    Rational c = nonconc::testing::random_rational(rng);
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(partial(p + q * c, v) == partial(p, v) + partial(q, v) * c);
      CHECK(partial(p * q, v) == partial(p, v) * q + p * partial(q, v));
    }
  }
}

TEST_CASE("ring axioms on random triples") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_poly(rng, 3, 3, 5);
    auto b = random_poly(rng, 3, 3, 5);
    auto c = random_poly(rng, 3, 3, 5);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a * b == b * a);
    CHECK((a - a).is_zero());
  }
}

TEST_CASE("compose_linear: identity, permutation, and dimension errors") {
  const std::vector<std::string> v3{"x1", "x2", "x3"};
  auto p = P("x1^2*x2 - x3 + 1/2", v3);
  CHECK(compose_linear(p, identity_matrix(3), 0) == p);
  RationalMatrix swap{{0, 1}, {1, 0}};
  CHECK(compose_linear(P("x1", v3), swap, 0) == P("x2", v3));
  CHECK(compose_linear(P("x2", v3), swap, 1) == P("x3", v3));
  CHECK_THROWS_AS(compose_linear(p, identity_matrix(2), 2), ValidationError);
}

TEST_CASE("compose_linear realises directional derivatives (chain-rule oracle)") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 2;
    auto p = random_poly(rng, n, 4, 6);
    auto T = random_matrix(rng, n);
    std::vector<unsigned> alpha(n, 0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    unsigned order = static_cast<unsigned>(trial % 4);
    for (unsigned i = 0; i < order; ++i) ++alpha[pick(rng)];
    auto y = random_point(rng, n);
    Rational lhs = eval(directional_oracle(p, T, alpha), matvec(T, y));
    Rational rhs = eval(partial(compose_linear(p, T, 0), alpha), y);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("compose_linear composes as p(S T x)") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_poly(rng, 3, 3, 5);
    auto S = random_matrix(rng, 2);
    auto T = random_matrix(rng, 2);
    CHECK(compose_linear(compose_linear(p, S, 1), T, 1) == compose_linear(p, matmul(S, T), 1));
  }
}

TEST_CASE("eval: examples and agreement of eval_f64 with exact evaluation") {
  std::vector<Rational> pt{2, 3};
  CHECK(eval(P("x^2+y"), pt) == 7);
  CHECK(eval(Polynomial(2), pt) == 0);
  CHECK_THROWS_AS(eval(P("x"), std::vector<Rational>{1}), ValidationError);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 4;
    auto p = random_poly(rng, n, 4, 8);
    std::vector<double> xf(n);
    std::vector<Rational> xq(n);
    for (std::size_t i = 0; i < n; ++i) {
      xf[i] = unif(rng);
      xq[i] = rational_from_double(xf[i]);
    }
    double exact = to_double(eval(p, xq));
    double approx = eval_f64(p, xf);
    // Relative to the magnitude sum so cancellation near roots is accounted for.
    double scale = 0;
    for (const auto& [m, c] : p.terms()) scale += std::abs(to_double(c));
    CHECK(std::abs(exact - approx) <= 1e-12 * std::max({std::abs(exact), scale, 1e-300}));
    if (std::abs(exact) > 1e-3 * scale) CHECK(std::abs(exact - approx) <= 1e-12 * std::abs(exact));
  }
}

TEST_CASE("det_poly_matrix: examples") {
  Polynomial x = P("x"), y = P("y"), zero(2);
  CHECK(det_poly_matrix({{x, zero}, {zero, y}}) == P("x*y"));
  CHECK(det_poly_matrix({{x, y}, {x, y}}).is_zero());
  CHECK_THROWS_AS(det_poly_matrix({{x, y}}), ValidationError);
}

TEST_CASE("cofactor and Bareiss determinants agree on random 4x4 matrices") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    PolyMatrix m(4, std::vector<Polynomial>(4));
    for (auto& row : m)
      for (auto& e : row) e = random_poly(rng, 3, 2, 3);
    CHECK(det_cofactor(m) == det_bareiss(m));
  }
}

TEST_CASE("determinant is multilinear and alternating in rows") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    PolyMatrix m(3, std::vector<Polynomial>(3));
    for (auto& row : m)
      for (auto& e : row) e = random_poly(rng, 2, 2, 3);
    auto d = det_poly_matrix(m);
    auto swapped = m;
    std::swap(swapped[0], swapped[2]);
    CHECK(det_poly_matrix(swapped) == -d);
    auto s = random_poly(rng, 2, 1, 2);
    auto extra = m;
    std::vector<Polynomial> other(3);
    for (auto& e : other) e = random_poly(rng, 2, 2, 3);
    auto combined = m;
    for (std::size_t j = 0; j < 3; ++j) {
      combined[1][j] = m[1][j] * s + other[j];
      extra[1][j] = other[j];
    }
    CHECK(det_poly_matrix(combined) == d * s + det_poly_matrix(extra));
  }
}

TEST_CASE("divide_exact") {
  auto a = P("x^2 - y^2");
  CHECK(divide_exact(a, P("x - y")) == P("x + y"));
  CHECK_THROWS_AS(divide_exact(P("x^2 + 1"), P("x - y")), DomainError);
}

TEST_CASE("expression parser") {
  CHECK(P("x·y − 1") == P("x*y - 1"));
  CHECK(P("(x+1)^2") == P("x^2 + 2*x + 1"));
  CHECK(P("x/2") == P("1/2*x"));
  CHECK(P("0.5*x") == P("1/2*x"));
  CHECK_THROWS_AS(P("x/y"), ValidationError);
  CHECK_THROWS_AS(P("z"), ValidationError);
  CHECK_THROWS_AS(P("x +"), ValidationError);
  CHECK(to_string(P("x^2 - 1/2*y + 3"), kXY) == "x^2 - 1/2*y + 3");
}

TEST_CASE("translate, embed, specialize") {
  const std::vector<Rational> shift{1, -1};
  CHECK(translate(P("x*y"), shift) == P("(x+1)*(y-1)"));
  const std::vector<std::size_t> map{2, 0};
  CHECK(embed(P("x + y^2"), 3, map) == parse_polynomial("c + a^2", std::vector<std::string>{"a", "b", "c"}));
  const std::vector<std::size_t> vars{0};
  const std::vector<Rational> vals{Rational(1, 2)};
  CHECK(specialize(P("x^2*y + x"), vars, vals) == parse_polynomial("1/4*y + 1/2", std::vector<std::string>{"y"}));
}
