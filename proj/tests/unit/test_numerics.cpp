#include <doctest.h>

#include <cmath>
#include <random>

#include "nonconc/jet.hpp"
#include "nonconc/optimize.hpp"
#include "nonconc/simplex.hpp"
#include "random_poly.hpp"

using namespace nonconc;

namespace {

std::vector<Rational> rv(std::initializer_list<int> xs) {
  std::vector<Rational> out;
  for (int x : xs) out.emplace_back(x);
  return out;
}

Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Checks whichever certificate came back, exactly.
void check_certificate(const std::vector<std::vector<Rational>>& pts, const std::vector<Rational>& target,
                       const HullMembership& h) {
  if (h.member) {
    REQUIRE(h.weights.size() == pts.size());
    Rational total = 0;
    std::vector<Rational> combo(target.size(), Rational(0));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(h.weights[i] >= 0);
      total += h.weights[i];
      for (std::size_t j = 0; j < target.size(); ++j) combo[j] += h.weights[i] * pts[i][j];
    }
    CHECK(total == 1);
    CHECK(combo == target);
  } else {
    REQUIRE(h.separator.size() == target.size());
    CHECK(h.margin > 0);
    for (const auto& p : pts) {
      std::vector<Rational> d(p.size());
      for (std::size_t j = 0; j < p.size(); ++j) d[j] = p[j] - target[j];
      CHECK(dot(h.separator, d) >= h.margin);
    }
  }
}

}  // namespace

TEST_CASE("lp: small bounded problem") {
  // max x + y, x + 2y + s1 = 4, 3x + y + s2 = 6 -> optimum at (8/5, 6/5).
  LinearProgram lp;
  lp.A = {rv({1, 2, 1, 0}), rv({3, 1, 0, 1})};
  lp.b = rv({4, 6});
  lp.c = rv({1, 1, 0, 0});
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == Rational(14, 5));
  CHECK(r.x[0] == Rational(8, 5));
  CHECK(r.x[1] == Rational(6, 5));
}

TEST_CASE("lp: infeasible and unbounded") {
  LinearProgram bad;
  bad.A = {rv({1, 1})};
  bad.b = rv({-1});
  bad.c = rv({0, 0});
  CHECK(solve_lp(bad).status == LpStatus::infeasible);

  LinearProgram open;
  open.A = {rv({1, -1})};
  open.b = rv({0});
  open.c = rv({1, 0});
  CHECK(solve_lp(open).status == LpStatus::unbounded);
}

TEST_CASE("hull: single exponent misses the balanced point") {
  std::vector<std::vector<Rational>> pts{rv({2, 0})};
  auto target = rv({1, 1});
  auto h = hull_membership(pts, target);
  CHECK_FALSE(h.member);
  CHECK(h.separator == rv({1, -1}));
  check_certificate(pts, target, h);
}

TEST_CASE("hull: segment midpoint and simplex interior") {
  std::vector<std::vector<Rational>> seg{rv({2, 0}), rv({0, 2})};
  auto h = hull_membership(seg, rv({1, 1}));
  CHECK(h.member);
  check_certificate(seg, rv({1, 1}), h);

  std::vector<std::vector<Rational>> tri{rv({3, 0, 0}), rv({0, 3, 0}), rv({0, 0, 3})};
  auto t = hull_membership(tri, rv({1, 1, 1}));
  CHECK(t.member);
  for (const auto& w : t.weights) CHECK(w == Rational(1, 3));
}

TEST_CASE("hull: certificates are always valid on random clouds") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coord(0, 4);
  int members = 0, outside = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t dim = 2 + trial % 3;
    std::size_t count = 1 + trial % 5;
    std::vector<std::vector<Rational>> pts;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<Rational> p;
      for (std::size_t j = 0; j < dim; ++j) p.emplace_back(coord(rng));
      pts.push_back(p);
    }
    std::vector<Rational> target;
    for (std::size_t j = 0; j < dim; ++j) target.emplace_back(coord(rng));
    auto h = hull_membership(pts, target);
    check_certificate(pts, target, h);
    (h.member ? members : outside)++;
  }
  CHECK(outside > 0);
  CHECK(members >= 0);
}

TEST_CASE("nelder-mead: shifted quadratic and rosenbrock") {
  auto quad = [](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2); };
  auto r = nelder_mead(quad, {0.0, 0.0});
  CHECK(r.value < 1e-8);
  CHECK(r.x[0] == doctest::Approx(1).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(-2).epsilon(1e-3));

  NelderMeadOptions opts;
  opts.max_iterations = 5000;
  opts.f_tolerance = 1e-14;
  auto rosen = [](std::span<const double> x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  auto rr = nelder_mead(rosen, {-1.2, 1.0}, opts);
  CHECK(rr.value < 1e-6);
}

TEST_CASE("nelder-mead: zero dimensions and target stop") {
  auto c = nelder_mead([](std::span<const double>) { return 4.0; }, {});
  CHECK(c.value == 4.0);
  NelderMeadOptions opts;
  opts.f_target = 0.5;
  auto r = nelder_mead([](std::span<const double> x) { return x[0] * x[0]; }, {3.0}, opts);
  CHECK(r.value <= 0.5);
}

TEST_CASE("jets: block composition matches exact linear substitution") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 2 + trial % 2, k = 2;
    Polynomial p = testing::random_nonzero_poly(rng, n * k, 3, 6);
    RationalMatrix T = testing::random_matrix(rng, n);
    Polynomial exact = p;
    for (std::size_t j = 0; j < k; ++j) exact = compose_linear(exact, T, j * n);
    Eigen::MatrixXd M(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) M(i, j) = to_double(T[i][j]);
    FloatPoly got = compose_blocks(FloatPoly::from(p), M, n, k);
    FloatPoly want = FloatPoly::from(exact);
    double scale = 1;
    for (const auto& t : want.terms) scale = std::max(scale, std::abs(t.c));
    // Compare as maps: every term of one appears in the other.
    for (const auto& t : want.terms) {
      double c = 0;
      for (const auto& g : got.terms)
        if (g.m == t.m) c = g.c;
      CHECK(std::abs(c - t.c) <= 1e-9 * scale);
    }
    for (const auto& g : got.terms) {
      double c = 0;
      for (const auto& t : want.terms)
        if (g.m == t.m) c = t.c;
      CHECK(std::abs(c - g.c) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("jets: truncated composition keeps only low block degrees") {
  std::mt19937_64 rng(9);
  const std::size_t n = 2, k = 2;
  Polynomial p = testing::random_nonzero_poly(rng, n * k, 4, 8);
  std::vector<Polynomial> subs;
  for (std::size_t v = 0; v < n * k; ++v) {
    std::size_t block = v / n;
    // Nonlinear change inside each block: w -> w + w^2 terms in the same block.
    Polynomial s = Polynomial::variable(n * k, v) +
                   Polynomial::variable(n * k, block * n) * Polynomial::variable(n * k, block * n + 1);
    subs.push_back(s);
  }
  Polynomial exact = compose(p, subs);
  std::vector<FloatPoly> fsubs;
  for (const auto& s : subs) fsubs.push_back(FloatPoly::from(s));
  const unsigned cap = 2;
  FloatPoly got = compose_truncated(FloatPoly::from(p), fsubs, n, k, cap);
  for (const auto& g : got.terms) {
    auto bd = block_degrees(g.m, n, k);
    for (unsigned d : bd) CHECK(d <= cap);
  }
  for (const auto& [m, c] : exact.terms()) {
    auto bd = block_degrees(m, n, k);
    if (bd[0] > cap || bd[1] > cap) continue;
    double found = 0;
    for (const auto& g : got.terms)
      if (g.m == m) found = g.c;
    CHECK(found == doctest::Approx(to_double(c)).epsilon(1e-9));
  }
}
