#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nonconc/error.hpp"
#include "nonconc/parse.hpp"
#include "nonconc/radon.hpp"
#include "phi_examples.hpp"

using namespace nonconc;
using nonconc::testing::line_gamma;

namespace {

RadonCase line_case() {
  RadonCase rc;
  rc.name = "line";
  rc.gamma = line_gamma();
  rc.s = 1;
  rc.delta = 1.0 / 3.0;
  rc.t_window = Box{{0.0}, {1.0}};
  rc.x_window = Box{{-17.0, -16.0}, {18.0, 16.0}};
  return rc;
}

// Length of { t in [t0, t1] : t in [a1, b1], a2 <= x1 + t x2 <= b2 }.
double line_oracle(double t0, double t1, double x1, double x2, double a1, double b1, double a2, double b2) {
  double lo = std::max(t0, a1), hi = std::min(t1, b1);
  if (x2 > 0) {
    lo = std::max(lo, (a2 - x1) / x2);
    hi = std::min(hi, (b2 - x1) / x2);
  } else if (x2 < 0) {
    lo = std::max(lo, (b2 - x1) / x2);
    hi = std::min(hi, (a2 - x1) / x2);
  } else if (x1 < a2 || x1 > b2) {
    return 0;
  }
  return std::max(0.0, hi - lo);
}

SetSpec random_rectangles(Rng& rng, std::size_t max_pieces) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t pieces = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(max_pieces));
  std::vector<SetSpec> parts;
  for (std::size_t j = 0; j < std::min(pieces, max_pieces); ++j) {
    double w = 0.2 + 0.5 * u(rng), h = 0.2 + 0.5 * u(rng);
    double x = u(rng) * (1 - w), y = u(rng) * (1 - h);
    parts.push_back(SetSpec::box({x, y}, {x + w, y + h}));
  }
  return SetSpec::set_union(std::move(parts));
}

LpOptions quick_lp() {
  LpOptions o;
  o.x_grid = 48;
  o.quad_n = 96;
  o.threads = 1;
  return o;
}

}  // namespace

TEST_CASE("operator on the unit square along the horizontal line") {
  RadonCase rc = line_case();
  rc.t_window = Box{{-1.0}, {2.0}};
  auto F = SetSpec::box({0, 0}, {1, 1});
  std::vector<double> x{0, 0};
  CHECK(apply_operator(rc, F, x, 300) == doctest::Approx(1.0).epsilon(1e-9));
  // Saturation: F covers the whole image of the window.
  auto big = SetSpec::box({-100, -100}, {100, 100});
  CHECK(apply_operator(rc, big, x, 300) == doctest::Approx(3.0));
  // A segment has measure zero and is never hit by midpoints in general position.
  auto segment = SetSpec::box({0.123456789, 0}, {0.123456789, 1});
  CHECK(apply_operator(rc, segment, x, 300) == 0.0);
}

TEST_CASE("operator matches the interval oracle for rectangles") {
  RadonCase rc = line_case();
  Rng rng = make_rng(5, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t quad = 2000;
  for (int trial = 0; trial < 100; ++trial) {
    double a1 = 0.6 * u(rng), b1 = a1 + 0.05 + 0.35 * u(rng);
    double a2 = 0.6 * u(rng), b2 = a2 + 0.05 + 0.35 * u(rng);
    std::vector<double> x{-1 + 2 * u(rng), -3 + 6 * u(rng)};
    double expected = line_oracle(0, 1, x[0], x[1], a1, b1, a2, b2);
    double got = apply_operator(rc, SetSpec::box({a1, a2}, {b1, b2}), x, quad);
    // Midpoint counting errs by at most one cell per interval endpoint.
    CHECK(std::abs(got - expected) <= 2.0 / quad + 1e-12);
  }
}

TEST_CASE("operator is monotone in F and bounded by the window") {
  RadonCase rc = line_case();
  Rng rng = make_rng(9, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    SetSpec small = random_rectangles(rng, 2);
    // Adding pieces can only grow the set.
    std::vector<SetSpec> more{small, random_rectangles(rng, 2)};
    SetSpec large = SetSpec::set_union(more);
    for (int j = 0; j < 30; ++j) {
      std::vector<double> x{-2 + 4 * u(rng), -4 + 8 * u(rng)};
      double a = apply_operator(rc, small, x, 128), b = apply_operator(rc, large, x, 128);
      CHECK(a <= b);
      CHECK(b <= rc.t_window.volume());
    }
  }
}

TEST_CASE("norm of a degenerate set vanishes and rho is left undefined") {
  RadonCase rc = line_case();
  auto segment = SetSpec::box({0.123456789, 0}, {0.123456789, 1});
  auto rep = lp_ratio_check(rc, {segment, SetSpec::box({0, 0}, {1, 1})}, quick_lp());
  CHECK(rep.rows[0].norm == 0.0);
  CHECK_FALSE(rep.rows[0].rho.has_value());
  REQUIRE(rep.rows[1].rho.has_value());
  CHECK(rep.max_rho == rep.min_rho);
  CHECK(rep.p == 3.0);
}

TEST_CASE("norm scales like |F|^(2/3) for shrinking squares") {
  RadonCase rc = line_case();
  LpOptions o = quick_lp();
  o.x_grid = 96;
  o.quad_n = 256;
  std::vector<double> lx, ly;
  for (double lambda : {1.0, 0.5, 0.25}) {
    auto F = SetSpec::box({0, 0}, {lambda, lambda});
    double norm = operator_norm(rc, F, 3.0, o.x_grid, o.quad_n, 1);
    lx.push_back(std::log(lambda * lambda));
    ly.push_back(std::log(norm));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  CHECK(sxy / sxx == doctest::Approx(2.0 / 3.0).epsilon(0.07 / (2.0 / 3.0)));
}

TEST_CASE("rho stays bounded over random rectangle unions") {
  RadonCase rc = line_case();
  Rng rng = make_rng(21, 0);
  std::vector<SetSpec> family;
  for (int i = 0; i < 8; ++i) family.push_back(random_rectangles(rng, 4));
  LpOptions o = quick_lp();
  o.doubling = false;
  auto rep = lp_ratio_check(rc, family, o);
  CHECK(rep.rows.size() == family.size());
  CHECK(rep.max_rho / rep.min_rho <= 10.0);
  CHECK(rep.max_rho <= rc.cap);
  CHECK(rep.pass);
}

TEST_CASE("doubling flags an under-resolved quadrature") {
  RadonCase rc = line_case();
  LpOptions o;
  o.x_grid = 4;
  o.quad_n = 4;
  o.threads = 1;
  auto rep = lp_ratio_check(rc, {SetSpec::box({0.1, 0.1}, {0.3, 0.3})}, o);
  CHECK(rep.warnings == 1);
  CHECK(rep.rows[0].resolution_warning);
}

TEST_CASE("difference integral hypothesis holds with delta 1/3 and fails with 1") {
  RadonCase rc = line_case();
  HypothesisOptions o;
  o.samples = 20;
  o.integral.threads = 1;
  auto rep = hypothesis_spot_check(rc, o);
  CHECK(rep.samples.size() == 20);
  CHECK(rep.pass);
  for (const auto& s : rep.samples) CHECK(s.measure <= 1.0);
  rc.delta = 1.0;
  auto bad = hypothesis_spot_check(rc, o);
  CHECK_FALSE(bad.pass);
  CHECK(bad.failures > 10);
}

TEST_CASE("density threshold rule for the line family") {
  GammaSpec g = line_gamma();
  DensityOptions d;
  d.starts = 4;
  auto rule = build_omega_tilde(g, 1, 1.5, 1.0 / 3.0, d);
  std::vector<double> t{0.4}, x{2.0, -1.0}, y{0.0, 0.0};
  CHECK(rule.density_at(t, x) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rule.contains(t, x));
  CHECK(rule.contains(t, y));
  // Phi_x ignores x and t, so one evaluation serves everything.
  CHECK(rule.cached_evaluations() == 1);

  RadonCase rc = line_case();
  rc.omega = build_omega_tilde(g, 1, 4.0, 1.0 / 3.0, d);
  CHECK_FALSE(rc.omega.contains(t, x));
  auto F = SetSpec::box({0, 0}, {1, 1});
  CHECK(apply_operator(rc, F, y, 64) == 0.0);
  auto rep = lp_ratio_check(rc, {F}, quick_lp());
  CHECK(rep.max_rho == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("threshold slice is empty where Phi_x vanishes identically") {
  const std::vector<std::string> vars{"t", "x1", "x2"};
  GammaSpec g{1, 2, 2, PolyVector({parse_polynomial("t", vars), parse_polynomial("x1 + t*x2^2", vars)})};
  DensityOptions d;
  d.starts = 4;
  auto rule = OmegaRule::density_threshold(g, 1, 1e-3, d);
  std::vector<double> t{0.5};
  std::vector<double> flat{0.3, 0.0}, curved{0.3, 1.0};
  CHECK(rule.density_at(t, flat) == 0.0);
  CHECK_FALSE(rule.contains(t, flat));
  CHECK(rule.contains(t, curved));
}

TEST_CASE("radon case validation") {
  RadonCase rc = line_case();
  rc.t_window = Box{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(apply_operator(rc, SetSpec::box({0, 0}, {1, 1}), std::vector<double>{0, 0}, 8), ValidationError);
  rc = line_case();
  CHECK_THROWS_AS(apply_operator(rc, SetSpec::box({0}, {1}), std::vector<double>{0, 0}, 8), ValidationError);
}
