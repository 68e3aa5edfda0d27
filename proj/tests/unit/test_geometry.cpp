#include <doctest.h>

#include <random>

#include "nonconc/diagonal.hpp"
#include "nonconc/error.hpp"
#include "nonconc/geometry.hpp"
#include "nonconc/parse.hpp"
#include "random_gamma.hpp"

using namespace nonconc;
using nonconc::testing::random_gamma;

namespace {

const std::vector<std::string> kTX{"t", "x1", "x2"};
const std::vector<std::string> kPhiVars{"t1", "t2", "x1", "x2"};

GammaSpec line_family() {
  return GammaSpec{1, 2, 2, PolyVector({parse_polynomial("t", kTX), parse_polynomial("x1 + t*x2", kTX)})};
}

}  // namespace

TEST_CASE("build_omega on the line family matches hand determinants") {
  RForm omega = build_omega(line_family());
  REQUIRE(omega.coefficients.size() == 2);
  // det[[0,1],[1,x2]] = -1 and det[[0,1],[t,x2]] = -t
  CHECK(omega.coefficients.at({0}) == parse_polynomial("-1", kTX));
  CHECK(omega.coefficients.at({1}) == parse_polynomial("-t", kTX));
}

TEST_CASE("build_omega of an x-independent family is the zero form") {
  GammaSpec g{1, 2, 2, PolyVector({parse_polynomial("t", kTX), parse_polynomial("t^2 + 3", kTX)})};
  CHECK(build_omega(g).is_zero());
  CHECK(build_phi_wedge(g).body.is_zero());
  CHECK(build_phi_jacobian(g).body.is_zero());
}

TEST_CASE("line family: Phi = t1 - t2 in the Jacobian convention") {
  auto g = line_family();
  auto wedge = build_phi_wedge(g);
  auto jac = build_phi_jacobian(g);
  // Direct expansion of the 4x4 Jacobian: rows (0,0,1,0), (1,t1,x2,0),
  // (0,0,0,1), (1,t2,0,x2) give the permutation (3,1,4,2), odd, times
  // det[[1,t1],[1,t2]].
  Polynomial oracle = parse_polynomial("t1 - t2", kPhiVars);
  CHECK(jac.body[0] == oracle);
  CHECK(wedge.body[0] == oracle);
  CHECK(jac.params == 2);
  CHECK(jac.k == 2);
}

TEST_CASE("k = 1 unit Jacobian") {
  const std::vector<std::string> v{"t", "x1"};
  GammaSpec g{1, 2, 1, PolyVector({parse_polynomial("t", v), parse_polynomial("x1", v)})};
  auto wedge = build_phi_wedge(g);
  auto jac = build_phi_jacobian(g);
  CHECK(jac.body[0].is_constant());
  CHECK(abs(jac.body[0].constant_term()) == 1);
  CHECK(wedge.body[0] == jac.body[0]);
}

TEST_CASE("wedge and Jacobian routes agree on random families") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t n = 1 + trial % 2, r = 1 + (trial / 2) % 2, k = 1 + trial % 3;
    auto g = random_gamma(rng, n, r, k);
    CAPTURE(n);
    CAPTURE(r);
    CAPTURE(k);
    CHECK(build_phi_wedge(g).body == build_phi_jacobian(g).body);
  }
}

TEST_CASE("graph form: omega is (-1)^{nr} det d_x gamma0 and Phi matches the lifted family") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 1 + trial % 2, r = 1 + (trial / 2) % 2, k = 2;
    auto lifted = random_gamma(rng, n, r, k);
    std::vector<Polynomial> g0(lifted.components.components().begin() + n, lifted.components.components().end());
    PolyVector gamma0(g0);
    auto g = lift_graph(gamma0, n, r, k);
    RForm omega = build_omega(g);
    // Direct r x r minors of d gamma0 / dx.
    std::vector<std::size_t> I(r);
    auto check_subset = [&](const std::vector<std::size_t>& idx) {
      PolyMatrix m(r, std::vector<Polynomial>(r));
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) m[a][b] = partial(gamma0[a], n + idx[b]);
      Polynomial minor = det_bareiss(m);
      if ((n * r) % 2) minor = -minor;
      auto it = omega.coefficients.find(idx);
      CHECK((it == omega.coefficients.end() ? minor.is_zero() : it->second == minor));
    };
    for (std::size_t a = 0; a < g.N2; ++a) {
      if (r == 1) {
        check_subset({a});
        continue;
      }
      for (std::size_t b = a + 1; b < g.N2; ++b) check_subset({a, b});
    }
    CHECK(build_phi_graph(gamma0, n, r, k).body == build_phi_wedge(g).body);
    CHECK(build_phi_graph(gamma0, n, r, k).body == build_phi_jacobian(g).body);
  }
}

TEST_CASE("graph form examples") {
  PolyVector g0({parse_polynomial("x1 + t*x2", kTX)});
  auto phi = build_phi_graph(g0, 1, 1, 2);
  CHECK(phi.body[0] == parse_polynomial("t1 - t2", kPhiVars));
  PolyVector flat({parse_polynomial("t^2 + 1", kTX)});
  CHECK(build_phi_graph(flat, 1, 1, 2).body.is_zero());
  CHECK_THROWS_AS(build_phi_graph(g0, 1, 2, 2), ValidationError);
}

TEST_CASE("rank-deficient x-dependence gives Phi = 0") {
  // gamma depends on x only through x1 + x2, so d gamma/dx has rank < r*k.
  GammaSpec g{1, 2, 2, PolyVector({parse_polynomial("t", kTX), parse_polynomial("(x1 + x2)*t + (x1 + x2)^2", kTX)})};
  CHECK(build_phi_jacobian(g).body.is_zero());
  CHECK(build_phi_wedge(g).body.is_zero());
}

TEST_CASE("|Phi| is invariant under exchanging t blocks") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    std::size_t n = 1 + trial % 2, r = 1, k = 2 + trial % 2;
    auto g = random_gamma(rng, n, r, k);
    auto phi = build_phi_jacobian(g);
    auto pt = nonconc::testing::random_point(rng, phi.nvars());
    auto swapped = pt;
    for (std::size_t i = 0; i < n; ++i) std::swap(swapped[i], swapped[n + i]);
    CHECK(abs(eval(phi.body[0], pt)) == abs(eval(phi.body[0], swapped)));
  }
}

TEST_CASE("vanishing-order bound r(k-1)") {
  std::vector<Rational> x0{Rational(1, 3), Rational(-2)};
  CHECK(vanishing_order_bound_check(line_family(), x0) == BoundCheck::holds);
  const std::vector<std::string> v{"t", "x1"};
  GammaSpec k1{1, 2, 1, PolyVector({parse_polynomial("t", v), parse_polynomial("x1 + t^2", v)})};
  CHECK(vanishing_order_bound_check(k1, std::vector<Rational>{Rational(5)}) == BoundCheck::holds);
  GammaSpec flat{1, 2, 2, PolyVector({parse_polynomial("t", kTX), parse_polynomial("t^2", kTX)})};
  CHECK(vanishing_order_bound_check(flat, x0) == BoundCheck::inconclusive);

  std::mt19937_64 rng(24);
  int conclusive = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 1 + trial % 2, r = 1 + (trial / 2) % 2;
    auto g = random_gamma(rng, n, r, 2);
    auto x = nonconc::testing::random_point(rng, g.N2);
    auto verdict = vanishing_order_bound_check(g, x);
    CHECK(verdict != BoundCheck::fails);
    if (verdict == BoundCheck::holds) ++conclusive;
  }
  CHECK(conclusive >= 8);
}

TEST_CASE("Bezout bound is the product of component degrees") {
  CHECK(bezout_bound(line_family()) == 2);
}
