#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "nonconc/json_io.hpp"

using namespace nonconc;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
  Json json() const { return parse_json_text(out, "stdout"); }
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "nonconc");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string sample(const std::string& name) { return std::string(NONCONC_CASES_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / ("nonconc_cli_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("ord on the 2x2 determinant reports q = 2") {
  auto r = call({"ord", "--phi", sample("det2.json")});
  REQUIRE(r.code == cli::ok);
  Json j = r.json();
  CHECK(j["q"] == 2);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["seed"] == 0);
}

TEST_CASE("ord on the mixed example reports q = 2") {
  auto r = call({"ord", "--phi", sample("mixed.json")});
  REQUIRE(r.code == cli::ok);
  CHECK(r.json()["q"] == 2);
}

TEST_CASE("quick selftest passes") {
  auto r = call({"selftest", "--quick"});
  CHECK(r.code == cli::ok);
  Json j = r.json();
  CHECK(j["failures"] == 0);
  for (const auto& row : j["checks"]) CHECK(row.contains("basis"));
}

TEST_CASE("positivity on the square difference gives the scaling witness") {
  auto r = call({"density", "positivity", "--phi", sample("sq-diff.json")});
  REQUIRE(r.code == cli::ok);
  Json j = r.json();
  CHECK(j["positivity"] == "zero");
  CHECK(j["witness"] == Json::array({-1, 1}));
  CHECK(j["witness_kind"] == "separator");
}

TEST_CASE("positivity on the 2x2 determinant is positive") {
  auto r = call({"density", "positivity", "--phi", sample("det2.json"), "--samples", "40"});
  REQUIRE(r.code == cli::ok);
  CHECK(r.json()["positivity"] == "positive");
}

TEST_CASE("identical runs give identical bytes, whatever the thread cap") {
  std::vector<std::vector<std::string>> commands = {
      {"density", "eval", "--phi", sample("det2.json"), "--point", "1/3,0,2,1", "--starts", "8", "--iterations", "200"},
      {"func", "int", "--phi", sample("difference.json"), "--set", sample("unit-interval.json"), "--budget", "20000"},
      {"func", "sup", "--phi", sample("difference.json"), "--set", sample("unit-interval.json"), "--budget", "5000"},
  };
  for (auto cmd : commands) {
    CAPTURE(cmd[0]);
    cmd.insert(cmd.end(), {"--seed", "17"});
    auto base = call(cmd);
    REQUIRE(base.code == cli::ok);
    CHECK(call(cmd).out == base.out);
    for (const char* t : {"1", "3"}) {
      auto c = cmd;
      c.insert(c.end(), {"--threads", t});
      CHECK(call(c).out == base.out);
    }
    CHECK(base.json()["seed"] == 17);
  }
}

TEST_CASE("seed falls back to the environment") {
  ::setenv("NONCONC_SEED", "99", 1);
  auto r = call({"gallery", "list"});
  CHECK(r.json()["seed"] == 99);
  auto explicit_seed = call({"gallery", "list", "--seed", "5"});
  CHECK(explicit_seed.json()["seed"] == 5);
  ::setenv("NONCONC_SEED", "abc", 1);
  CHECK(call({"gallery", "list"}).code == cli::invalid_input);
  ::unsetenv("NONCONC_SEED");
}

TEST_CASE("invalid input exits with 2") {
  CHECK(call({}).code == cli::invalid_input);
  CHECK(call({"frobnicate"}).code == cli::invalid_input);
  CHECK(call({"ord", "--phi", "/nonexistent/phi.json"}).code == cli::invalid_input);
  CHECK(call({"gallery", "build", "no_such_entry"}).code == cli::invalid_input);

  auto bad = temp_file("bad.json", "{\n  \"n\": 1,\n  \"k\": 2,\n  \"components\": [\"x1 - x2\"\n}\n");
  auto r = call({"ord", "--phi", bad});
  CHECK(r.code == cli::invalid_input);
  CHECK(r.err.find(bad + ":5:") != std::string::npos);

  auto bad_poly = temp_file("badpoly.json", R"({"n": 1, "k": 2, "components": ["x1 - "]})");
  CHECK(call({"ord", "--phi", bad_poly}).code == cli::invalid_input);
}

TEST_CASE("a failing verification exits with 3 and still writes the report") {
  // The line family does not satisfy the hypothesis with delta = 1.
  auto text = R"({
    "gamma": {"gallery": "line_family"}, "s": 1, "delta": 1,
    "t_window": {"lo": [0], "hi": [1]}, "x_window": {"lo": [-1, -1], "hi": [1, 1]},
    "family": {"sets": [{"box": {"lo": [0, -1], "hi": [1, 1]}}]},
    "lp": {"x_grid": 16, "quad_n": 32, "doubling": false},
    "spot_check": {"samples": 6}
  })";
  auto r = call({"radon", "check", "--case", temp_file("fail.json", text)});
  CHECK(r.code == cli::check_failed);
  Json j = r.json();
  CHECK(j["pass"] == false);
  CHECK(j["hypothesis"]["pass"] == false);
  CHECK(j["hypothesis"]["basis"] == "derived");
}

TEST_CASE("sweep and triangular checks pass on known-good inputs") {
  auto sweep = call({"func", "sweep", "--phi", sample("difference.json"), "--family", sample("interval-family.json"),
                     "--s", "1", "--budget", "20000", "--sup-budget", "2000"});
  CHECK(sweep.code == cli::ok);
  CHECK(sweep.json()["chain_ok"] == true);
  auto tri = call({"density", "triangular", "--nprime", "2", "--samples", "20"});
  CHECK(tri.code == cli::ok);
  CHECK(tri.json()["failures"] == 0);
}

TEST_CASE("--out writes the report to a file") {
  auto path = (std::filesystem::temp_directory_path() / "nonconc_cli_out.json").string();
  std::filesystem::remove(path);
  auto r = call({"gallery", "build", "difference", "--out", path});
  REQUIRE(r.code == cli::ok);
  CHECK(r.out.empty());
  Json j = read_json_file(path);
  CHECK(j["name"] == "difference");
  CHECK(j["command"] == "gallery build");
}

TEST_CASE("phi builds agree across routes") {
  auto r = call({"phi", "--gamma", sample("line-gamma.json"), "--route", "both"});
  REQUIRE(r.code == cli::ok);
  Json j = r.json();
  CHECK(j["routes_agree"] == true);
  CHECK(j["phi"]["components"] == Json::array({"x1 - x2"}));
}
