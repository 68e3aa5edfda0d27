#include <doctest.h>

#include <cmath>
#include <random>

#include "nonconc/error.hpp"
#include "nonconc/functionals.hpp"
#include "phi_examples.hpp"

using namespace nonconc;
using nonconc::testing::det2_phi;
using nonconc::testing::line_phi;
using nonconc::testing::make_phi;
using nonconc::testing::mixed_order_phi;

namespace {

const std::vector<std::string> kXY{"x", "y"};
const std::vector<std::string> kX{"x"};

SupOptions small_sup(std::uint64_t seed = 1) {
  SupOptions o;
  o.seed = seed;
  o.budget = 20000;
  o.threads = 1;
  return o;
}

IntOptions small_int(std::uint64_t seed = 1, std::size_t budget = 200000) {
  IntOptions o;
  o.seed = seed;
  o.budget = budget;
  o.threads = 1;
  return o;
}

// Brute-force grid maximum of the mixed-order example over (a x b)^2.
double grid_sup_mixed(double a, double b, int g) {
  double best = 0;
  for (int i1 = 0; i1 <= g; ++i1)
    for (int j1 = 0; j1 <= g; ++j1)
      for (int i2 = 0; i2 <= g; ++i2)
        for (int j2 = 0; j2 <= g; ++j2) {
          double dx = a * (i1 - i2) / g, dy = b * (j1 - j2) / g;
          best = std::max(best, std::abs(dx * dx + dy * dy * dy));
        }
  return best;
}

}  // namespace

TEST_CASE("sets: boxes, unions, affine images, predicates") {
  auto b = SetSpec::box({0, 0}, {2, 1});
  CHECK(b.volume() == 2.0);
  auto u = SetSpec::set_union({SetSpec::box({0, 0}, {2, 1}), SetSpec::box({1, 0}, {3, 2})});
  CHECK(u.volume_is_exact());
  CHECK(u.volume() == doctest::Approx(2 + 4 - 1));
  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 0, 3;
  auto af = SetSpec::affine(A, {1, -1}, Box{{0, 0}, {1, 1}});
  CHECK(af.volume() == doctest::Approx(6.0));
  CHECK(af.contains(std::vector<double>{1 + 2 + 1, -1 + 3}));
  CHECK_FALSE(af.contains(std::vector<double>{0, 0}));

  // Unit disk quarter via a predicate.
  auto disk = SetSpec::predicate({parse_polynomial("1 - x^2 - y^2", kXY)}, Box{{0, 0}, {1, 1}});
  CHECK(disk.volume(3, 400000) == doctest::Approx(M_PI / 4).epsilon(0.01));
  Rng rng(5);
  for (int i = 0; i < 200; ++i) CHECK(disk.contains(disk.sample(rng)));
  for (int i = 0; i < 200; ++i) CHECK(u.contains(u.sample(rng)));

  CHECK_THROWS_AS(SetSpec::box({1}, {0}), ValidationError);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(SetSpec::affine(S, {0, 0}, Box{{0, 0}, {1, 1}}), ValidationError);
  auto empty = SetSpec::predicate({parse_polynomial("-1 - x^2", kXY)}, Box{{0, 0}, {1, 1}});
  CHECK_THROWS_AS(empty.sample(rng), DomainError);
}

TEST_CASE("sets: union sampling is uniform over overlaps") {
  auto u = SetSpec::set_union({SetSpec::box({0}, {2}), SetSpec::box({1}, {3})});
  Rng rng(9);
  int overlap = 0;
  const int N = 60000;
  for (int i = 0; i < N; ++i) {
    double x = u.sample(rng)[0];
    if (x >= 1 && x <= 2) ++overlap;
  }
  // Overlap is one third of the union.
  CHECK(static_cast<double>(overlap) / N == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("sup: diameter of an interval and a point") {
  auto r = sup_functional(line_phi(), SetSpec::box({0}, {1}), small_sup());
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(sup_functional(line_phi(), SetSpec::point({0.3}), small_sup()).value == 0.0);
  auto p = sup_functional(mixed_order_phi(), SetSpec::point({0.3, -2}), small_sup());
  CHECK(p.value == 0.0);
}

TEST_CASE("sup: mixed-order example over boxes matches a^2 + b^3") {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.25, 4.0}}) {
    auto r = sup_functional(mixed_order_phi(), SetSpec::box({0, 0}, {a, b}), small_sup());
    double closed = a * a + b * b * b;
    CHECK(r.value == doctest::Approx(closed).epsilon(1e-3));
    CHECK(grid_sup_mixed(a, b, 8) == doctest::Approx(closed).epsilon(1e-12));
    // Sampling alone, without vertices, still lands close from below.
    SupOptions o = small_sup();
    o.corner_limit = 0;
    auto sampled = sup_functional(mixed_order_phi(), SetSpec::box({0, 0}, {a, b}), o);
    CHECK(sampled.value <= closed * (1 + 1e-12));
    CHECK(sampled.value >= 0.98 * closed);
  }
}

TEST_CASE("sup: monotone on nested boxes") {
  double prev = 0;
  for (double h : {0.1, 0.3, 0.5, 1.0}) {
    auto r = sup_functional(det2_phi(), SetSpec::box({0, 0, 0, 0}, {h, h, 2 * h, h}), small_sup());
    CHECK(r.value >= prev);
    prev = r.value;
  }
}

TEST_CASE("sup: affine equivariance for the determinant functional") {
  // Phi(x1, x2, x3) = det(x1 - x3, x2 - x3) on R^2.
  PhiSpec phi = make_phi(2, 3, 0, {"a1", "a2", "b1", "b2", "c1", "c2"}, {"(a1 - c1)*(b2 - c2) - (a2 - c2)*(b1 - c1)"});
  auto E = SetSpec::box({0, 0}, {1, 2});
  double base = sup_functional(phi, E, small_sup()).value;
  CHECK(base == doctest::Approx(2.0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd L(2, 2);
    L << g(rng), g(rng), g(rng), g(rng);
    std::vector<double> shift{g(rng), g(rng)};
    double mapped = sup_functional(phi, E.mapped(L, shift), small_sup()).value;
    CHECK(mapped == doctest::Approx(std::abs(L.determinant()) * base).epsilon(1e-9));
  }
}

TEST_CASE("int: |x - y| over the unit square") {
  auto E = SetSpec::box({0}, {1});
  auto r = int_functional(line_phi(), MeasureSpec::lebesgue(), E, small_int());
  CHECK(std::abs(r.value - 1.0 / 3) <= 3 * r.std_error);
  CHECK(r.std_error > 0);
  // Independent midpoint quadrature on a 2000 x 2000 grid.
  const int G = 2000;
  double quad = 0;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) quad += std::abs(i - j) / static_cast<double>(G);
  quad /= static_cast<double>(G) * G;
  CHECK(std::abs(r.value - quad) <= 3 * r.std_error + 1e-6);

  IntOptions so = small_int();
  so.stratified = true;
  auto st = int_functional(line_phi(), MeasureSpec::lebesgue(), E, so);
  CHECK(std::abs(st.value - 1.0 / 3) <= 3 * st.std_error);
  CHECK(st.std_error < r.std_error);
}

TEST_CASE("int: zero functional and L^3/3 scaling") {
  PhiSpec zero = make_phi(1, 2, 0, {"x", "y"}, {"0"});
  auto z = int_functional(zero, MeasureSpec::lebesgue(), SetSpec::box({0}, {1}), small_int());
  CHECK(z.value == 0.0);
  std::vector<double> logs, logv;
  for (double L : {0.25, 0.5, 1.0, 2.0}) {
    auto r = int_functional(line_phi(), MeasureSpec::lebesgue(), SetSpec::box({0}, {L}), small_int(7));
    CHECK(std::abs(r.value - L * L * L / 3) <= 4 * r.std_error);
    logs.push_back(std::log(L));
    logv.push_back(std::log(r.value));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    mx += logs[i] / 4;
    my += logv[i] / 4;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    num += (logs[i] - mx) * (logv[i] - my);
    den += (logs[i] - mx) * (logs[i] - mx);
  }
  CHECK(num / den == doctest::Approx(3.0).epsilon(0.05 / 3));
}

TEST_CASE("int: weighted and discrete measures") {
  auto w = MeasureSpec::weighted(parse_polynomial("2*x", kX));
  auto E = SetSpec::box({0}, {1});
  CHECK(w.mass(E, 1).value == doctest::Approx(1.0).epsilon(0.01));
  auto r = int_functional(line_phi(), w, E, small_int(3));
  // 4 * int int |x - y| x y = 4/15.
  CHECK(std::abs(r.value - 4.0 / 15) <= 3 * r.std_error);

  auto d = MeasureSpec::discrete({{0.0}, {1.0}, {5.0}}, {1.0, 1.0, 3.0});
  auto rd = int_functional(line_phi(), d, E, small_int());
  CHECK(rd.exact);
  CHECK(rd.value == 2.0);
  CHECK(rd.mu_E == 2.0);
  CHECK(d.mass(SetSpec::box({-10}, {10})).value == 5.0);
}

TEST_CASE("sweep: intervals give c' = 1 and c = 1/3") {
  std::vector<SetSpec> family;
  for (double L : {0.5, 1.0, 2.0}) family.push_back(SetSpec::box({0}, {L}));
  family.push_back(SetSpec::point({1.0}));
  auto rep = constant_sweep(line_phi(), MeasureSpec::lebesgue(), family, 1.0, small_sup(), small_int());
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[3].skipped);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = rep.rows[i];
    CHECK(row.c_prime == doctest::Approx(1.0));
    CHECK(std::abs(row.c - 1.0 / 3) <= 3 * row.c_stderr);
    CHECK(row.chain_ok);
    CHECK(row.c_prime * std::pow(row.mu_E, rep.s) == doctest::Approx(row.S));
  }
  CHECK(rep.chain_ok);
  CHECK(rep.min_c <= rep.min_c_prime);
}

TEST_CASE("sweep: mixed-order example at s = 6/5 on equal-area boxes") {
  std::vector<SetSpec> family;
  const double area = 1.0;
  for (double beta : {0.5, 0.75, 1.0, 1.5, 2.0}) {
    double a = beta * std::pow(area, 0.6);
    family.push_back(SetSpec::box({0, 0}, {a, area / a}));
  }
  auto rep = constant_sweep(mixed_order_phi(), MeasureSpec::lebesgue(), family, 1.2, small_sup(), small_int(1, 50000));
  // a^2 + b^3 >= 2.5 (2/3)^0.6 (ab)^{6/5} with equality at a^5 = (2/3)^3 ... ; on this family c' >= 1.
  CHECK(rep.min_c_prime >= 1.0);
  CHECK(rep.chain_ok);
}

TEST_CASE("chebyshev: uniform sample on [0,1], degree 1") {
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
  for (int i = 0; i < 1000; ++i) {
    pts.push_back({(i + 0.5) / 1000});
    w.push_back(1.0 / 1000);
  }
  auto mu = MeasureSpec::discrete(pts, w);
  auto res = chebyshev_set(mu, 1, 4.0);
  CHECK(res.dim == 2);
  CHECK(res.complement_ok);
  CHECK(res.mu_complement < 0.25);
  CHECK(res.bound_ok);
  CHECK(res.max_cramer <= 1 + 1e-9);
  std::vector<double> f{-0.5, 1.0};  // x - 1/2
  CHECK(chebyshev_ratio(res, mu, f) <= 1.0);
  std::vector<double> one{1.0, 0.0};
  CHECK(chebyshev_ratio(res, mu, one) == doctest::Approx(1.0 / (4.0 * 2 * 1.0)));
}

TEST_CASE("chebyshev: random planar measures, degree 2") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (double tau : {2.0, 8.0}) {
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    for (int i = 0; i < 400; ++i) {
      pts.push_back({u(rng), u(rng)});
      w.push_back(u(rng));
    }
    auto mu = MeasureSpec::discrete(pts, w);
    ChebyshevOptions o;
    o.seed = 3;
    o.restarts = 3;
    auto res = chebyshev_set(mu, 2, tau, o);
    CHECK(res.dim == 6);
    CHECK(res.complement_ok);
    CHECK(res.bound_ok);
    CHECK(res.max_cramer <= 1 + 1e-9);
    CHECK(res.tests == 100);
  }
}

TEST_CASE("chebyshev: point mass and atoms on a line") {
  auto point = MeasureSpec::discrete({{0.3, 0.7}}, {2.0});
  auto res = chebyshev_set(point, 2, 1.0);
  CHECK(res.dim == 1);
  CHECK(res.vanishing.size() == 5);
  CHECK(res.in_E[0]);
  CHECK(res.mu_complement == 0.0);
  CHECK(res.bound_ok);

  // Atoms on the diagonal: x - y vanishes on the support.
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({i / 50.0, i / 50.0});
  auto line = MeasureSpec::discrete(pts, std::vector<double>(50, 1.0 / 50));
  auto lr = chebyshev_set(line, 1, 4.0);
  CHECK(lr.dim == 2);
  CHECK(lr.vanishing.size() == 1);
  CHECK(lr.bound_ok);
  std::vector<double> diff{0.0, 1.0, -1.0};
  CHECK(chebyshev_ratio(lr, line, diff) == 0.0);
}
