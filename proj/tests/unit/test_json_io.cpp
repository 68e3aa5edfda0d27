#include <doctest.h>

#include "nonconc/error.hpp"
#include "nonconc/gallery.hpp"
#include "nonconc/json_io.hpp"
#include "nonconc/parse.hpp"
#include "nonconc/random.hpp"
#include "random_gamma.hpp"

using namespace nonconc;

TEST_CASE("rationals accept strings and numbers") {
  CHECK(rational_from_json(Json("3/6")) == Rational(1, 2));
  CHECK(rational_from_json(Json(2)) == Rational(2));
  CHECK(rational_from_json(Json(0.25)) == Rational(1, 4));
  CHECK(rational_to_json(Rational(-4, 6)) == Json("-2/3"));
  CHECK_THROWS_AS(rational_from_json(Json("1/0")), ValidationError);
  CHECK_THROWS_AS(rational_from_json(Json::array()), ValidationError);
}

TEST_CASE("malformed text reports line and column") {
  try {
    parse_json_text("{\n  \"n\": 1,\n  \"k\": }", "case.json");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    std::string what = e.what();
    CHECK(what.rfind("case.json:3:", 0) == 0);
    CHECK(what.find("malformed JSON") != std::string::npos);
  }
}

TEST_CASE("phi round trips through JSON for every gallery entry") {
  for (const auto& entry : gallery()) {
    CAPTURE(entry.name);
    Json j = phi_to_json(entry.phi);
    PhiSpec back = phi_from_json(j);
    CHECK(back.n == entry.phi.n);
    CHECK(back.k == entry.phi.k);
    CHECK(back.params == entry.phi.params);
    CHECK(back.body == entry.phi.body);
    CHECK(phi_to_json(back) == j);
    CHECK(phi_from_json(Json{{"gallery", entry.name}}).body == entry.phi.body);
  }
}

TEST_CASE("random gammas round trip and the route form matches the builders") {
  Rng rng = make_rng(41, 0);
  for (int trial = 0; trial < 10; ++trial) {
    GammaSpec g = testing::random_gamma(rng, 2, 2, 2);
    Json j = gamma_to_json(g);
    GammaSpec back = gamma_from_json(j);
    CHECK(back.components == g.components);
    CHECK(gamma_to_json(back) == j);
    CHECK(phi_from_json(Json{{"gamma", j}, {"route", "wedge"}}).body == build_phi_wedge(g).body);
    CHECK(phi_from_json(Json{{"gamma", j}}).body == build_phi_jacobian(g).body);
  }
}

TEST_CASE("sets and measures round trip") {
  Json box = {{"box", {{"lo", {0, 0}}, {"hi", {1, 2}}}}};
  Json uni = {{"union", {box, {{"box", {{"lo", {3, 3}}, {"hi", {4, 4}}}}}}}};
  Json aff = {{"affine", {{"matrix", {{2.0, 0.0}, {1.0, 1.0}}}, {"offset", {0.5, 0.0}}, {"base", box["box"]}}}};
  Json pred = {{"predicate", {{"variables", {"v1", "v2"}}, {"constraints", {"1 - v1^2 - v2^2"}}, {"bbox", {{"lo", {-1, -1}}, {"hi", {1, 1}}}}}}};
  for (const Json& j : {box, uni, aff, pred}) {
    CAPTURE(j.dump());
    // Printing normalizes term order, so compare after one pass.
    Json once = set_to_json(set_from_json(j));
    CHECK(set_to_json(set_from_json(once)) == once);
    CHECK(set_from_json(once).kind() == set_from_json(j).kind());
  }
  CHECK(set_from_json(uni).volume() == doctest::Approx(3.0));
  CHECK(set_from_json(aff).volume() == doctest::Approx(4.0));

  Json leb = {{"lebesgue", Json::object()}};
  CHECK(measure_to_json(measure_from_json(leb)) == leb);
  Json disc = {{"discrete", {{"points", {{0.0, 0.0}, {1.0, 0.5}}}}}};
  MeasureSpec m = measure_from_json(disc);
  REQUIRE(m.weights().size() == 2);
  CHECK(m.weights()[0] == doctest::Approx(0.5));
  CHECK(measure_from_json(measure_to_json(m)).points() == m.points());

  CHECK_THROWS_AS(set_from_json(Json{{"ball", 1}}), ValidationError);
  CHECK_THROWS_AS(set_from_json(Json{{"box", {{"lo", {1}}, {"hi", {0}}}}}), ValidationError);
}

TEST_CASE("radon cases round trip") {
  Json j = {{"name", "line"},
            {"gamma", {{"gallery", "line_family"}}},
            {"s", 1},
            {"delta", "1/3"},
            {"t_window", {{"lo", {0}}, {"hi", {1}}}},
            {"x_window", {{"lo", {-1, -1}}, {"hi", {1, 1}}}}};
  RadonCase rc = radon_case_from_json(j);
  CHECK(rc.delta == doctest::Approx(1.0 / 3.0));
  CHECK(rc.cap == 10.0);
  CHECK(rc.omega.kind() == OmegaRule::Kind::full);
  Json out = radon_case_to_json(rc);
  RadonCase again = radon_case_from_json(out);
  CHECK(again.gamma.components == rc.gamma.components);
  CHECK(radon_case_to_json(again) == out);

  j["omega"] = {{"threshold", {{"q", 1}, {"c", 0.5}}}};
  CHECK(radon_case_from_json(j).omega.kind() == OmegaRule::Kind::density_threshold);
  j["omega"] = {{"bogus", 1}};
  CHECK_THROWS_AS(radon_case_from_json(j), ValidationError);
}
