#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "nonconc/density.hpp"
#include "nonconc/diagonal.hpp"
#include "nonconc/error.hpp"
#include "nonconc/functionals.hpp"
#include "nonconc/gallery.hpp"
#include "nonconc/hausdorff.hpp"
#include "nonconc/json_io.hpp"
#include "nonconc/parse.hpp"
#include "nonconc/radon.hpp"
#include "nonconc/simplex.hpp"

namespace nonconc::cli {

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_path;
  bool compact = false;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("NONCONC_SEED")) {
      std::string text(env);
      try {
        std::size_t used = 0;
        auto v = std::stoull(text, &used, 0);
        if (used == text.size()) return v;
      } catch (const std::exception&) {
      }
      throw ValidationError("NONCONC_SEED is not an unsigned 64-bit integer: \"" + text + "\"");
    }
    return 0;
  }
};

std::vector<Rational> parse_values(const std::vector<std::string>& text) {
  std::vector<Rational> out;
  for (const auto& t : text) out.push_back(parse_rational(t));
  return out;
}

PhiSpec load_phi(const std::string& path) { return phi_from_json(read_json_file(path)); }

// Freezes parameters when Phi has any; they must then be supplied.
PhiSpec frozen_phi(const PhiSpec& phi, const std::vector<std::string>& params) {
  if (phi.params == 0) {
    require(params.empty(), "phi has no parameters but --params was given");
    return phi;
  }
  require(params.size() == phi.params,
          "phi has " + std::to_string(phi.params) + " parameters; pass them with --params");
  return freeze_params(phi, parse_values(params));
}

std::vector<Rational> base_point(const PhiSpec& phi, const std::vector<std::string>& at) {
  if (at.empty()) return std::vector<Rational>(phi.n, Rational(0));
  require(at.size() == phi.n, "--at needs n = " + std::to_string(phi.n) + " coordinates");
  return parse_values(at);
}

unsigned resolve_q(const PhiSpec& phi, std::optional<unsigned> q) {
  if (q) return *q;
  auto e = order_of_vanishing(phi);
  if (!e.q) throw ValidationError("phi vanishes identically; there is no order to use");
  return *e.q;
}

NormKind norm_from(const std::string& s) { return parse_norm(s); }

Box box_from_args(const std::string& path, const std::vector<double>& lo, const std::vector<double>& hi) {
  if (!path.empty()) return box_from_json(read_json_file(path));
  require(!lo.empty() && lo.size() == hi.size(), "give --box FILE or matching --lo and --hi");
  return box_from_json(Json{{"lo", lo}, {"hi", hi}});
}

Json header(const std::string& command, std::uint64_t seed) {
  return Json{{"schema_version", kSchemaVersion}, {"command", command}, {"seed", seed}};
}

// Rational strings become integers when integral, doubles otherwise.
Json plain_numbers(const Json& rationals) {
  Json out = Json::array();
  for (const auto& r : rationals) {
    Rational v = rational_from_json(r);
    if (v.get_den() == 1 && v.get_num().fits_slong_p())
      out.push_back(v.get_num().get_si());
    else
      out.push_back(v.get_d());
  }
  return out;
}

void merge(Json& into, const Json& from) {
  for (auto it = from.begin(); it != from.end(); ++it) into[it.key()] = it.value();
}

// One built-in check run by `selftest`.
struct SelfCheck {
  std::string name;
  std::string basis;
  std::function<bool()> run;
};

std::vector<SelfCheck> selftest_checks(bool quick) {
  std::vector<SelfCheck> checks = {
      {"difference vanishes to order one", "trivial",
       [] { return order_of_vanishing(gallery_entry("difference").phi).q == 1u; }},
      {"2x2 determinant vanishes to order two", "stated",
       [] { return order_of_vanishing(gallery_entry("determinantal_2").phi).q == 2u; }},
      {"single generator squares to the identity", "trivial",
       [] {
         auto M = clifford_matrices(1);
         return M[0] == IntMatrix{{0, 1}, {1, 0}};
       }},
      {"cover of [0,1] telescopes to 1 at sigma 1", "trivial",
       [] {
         CoverOptions o;
         o.threads = 1;
         o.sup.budget = 200;
         for (unsigned L : {0u, 3u, 6u})
           if (std::abs(cover_upper(gallery_entry("difference").phi, 1.0, Box{{0.0}, {1.0}}, L, o).value - 1.0) > 1e-9)
             return false;
         return true;
       }},
      {"sup of |x - y| on [0,1] is the diameter", "trivial",
       [] {
         SupOptions o;
         o.budget = 1000;
         o.threads = 1;
         return std::abs(sup_functional(gallery_entry("difference").phi, SetSpec::box({0}, {1}), o).value - 1.0) < 1e-12;
       }},
      {"line family sees the unit square along y = 0", "derived",
       [] {
         RadonCase rc;
         rc.gamma = *gallery_entry("line_family").gamma;
         rc.t_window = Box{{-1.0}, {2.0}};
         rc.x_window = Box{{-1.0, -1.0}, {1.0, 1.0}};
         std::vector<double> x{0, 0};
         return std::abs(apply_operator(rc, SetSpec::box({0, 0}, {1, 1}), x, 300) - 1.0) < 1e-9;
       }},
      {"empty interior gives zero operator", "trivial",
       [] {
         RadonCase rc;
         rc.gamma = *gallery_entry("line_family").gamma;
         rc.t_window = Box{{0.0}, {1.0}};
         rc.x_window = Box{{-1.0, -1.0}, {1.0, 1.0}};
         std::vector<double> x{0.3, 0.2};
         return apply_operator(rc, SetSpec::box({0.123456789, 0}, {0.123456789, 1}), x, 256) == 0.0;
       }},
      {"difference density equals one", "derived",
       [] {
         DensityOptions d;
         d.starts = 4;
         d.threads = 1;
         d.run_positivity = false;
         std::vector<Rational> x{Rational(0)};
         return std::abs(density_infimum(gallery_entry("difference").phi, 1, x, d).upper - 1.0) < 1e-9;
       }},
  };
  if (!quick) {
    checks.push_back({"square difference has zero density", "derived", [] {
                        DensityOptions d;
                        d.threads = 1;
                        std::vector<Rational> x(2, Rational(0));
                        auto r = density_infimum(gallery_entry("square_difference").phi, 2, x, d);
                        return r.upper < 1e-3 && r.positivity && r.positivity->verdict == Positivity::zero;
                      }});
    checks.push_back({"2x2 determinant has positive density", "stated", [] {
                        DensityOptions d;
                        d.threads = 1;
                        d.starts = 16;
                        std::vector<Rational> x(4, Rational(1, 3));
                        auto r = density_infimum(gallery_entry("determinantal_2").phi, 2, x, d);
                        return r.upper > 1e-2 && r.positivity && r.positivity->verdict == Positivity::positive;
                      }});
  }
  return checks;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonconcentration functionals: orders, densities, covers and Radon-like bounds", "nonconc"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Run seed (falls back to NONCONC_SEED, then 0)");
  app.add_option("--threads", common.threads, "Worker cap (0 = all cores)");
  app.add_option("--out", common.out_path, "Write the report here instead of stdout");
  app.add_flag("--compact", common.compact, "Single-line JSON");

  // Shared option holders.
  std::string phi_path, gamma_path, set_path, measure_path, family_path, box_path, case_path, route = "jacobian";
  std::vector<std::string> at, params;
  std::optional<unsigned> q;
  std::string norm = "max";
  std::size_t starts = 64, iterations = 500, samples = 200, budget = 0;
  bool with_positivity = false;

  std::function<Json(std::uint64_t)> action;
  // Set by a verification command whose inequality failed; the report is
  // still written.
  std::optional<std::string> failure;

  auto add_phi = [&](CLI::App* sub) {
    sub->add_option("--phi", phi_path, "Phi JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--params", params, "Values of the frozen parameters")->delimiter(',');
  };

  // phi
  auto* phi_cmd = app.add_subcommand("phi", "Build Phi_x from a polynomial family");
  phi_cmd->add_option("--gamma", gamma_path, "GammaSpec JSON file")->required()->check(CLI::ExistingFile);
  phi_cmd->add_option("--route", route, "jacobian, wedge or both")->check(CLI::IsMember({"jacobian", "wedge", "both"}));
  std::vector<std::string> sample_x;
  phi_cmd->add_option("--sample-x", sample_x, "Parameter point for the order bound check")->delimiter(',');
  phi_cmd->callback([&] {
    action = [&](std::uint64_t seed) {
      GammaSpec g = gamma_from_json(read_json_file(gamma_path));
      Json rep = header("phi", seed);
      rep["gamma"] = gamma_to_json(g);
      if (route == "both") {
        PhiSpec a = build_phi_jacobian(g), b = build_phi_wedge(g);
        rep["phi"] = phi_to_json(a);
        rep["routes_agree"] = a.body == b.body;
        rep["basis"] = "stated";
        if (!(a.body == b.body)) failure = "wedge and Jacobian routes disagree";
      } else {
        rep["phi"] = phi_to_json(route == "wedge" ? build_phi_wedge(g) : build_phi_jacobian(g));
      }
      rep["bezout_bound"] = bezout_bound(g);
      if (!sample_x.empty()) {
        require(sample_x.size() == g.N2, "--sample-x needs N2 coordinates");
        auto bound = vanishing_order_bound_check(g, parse_values(sample_x));
        rep["order_bound"] = to_string(bound);
        if (bound == BoundCheck::fails) failure = "order of vanishing below r(k-1)";
        rep["order_bound_basis"] = "stated";
      }
      return rep;
    };
  });

  // ord
  auto* ord_cmd = app.add_subcommand("ord", "Order of vanishing on the diagonal");
  add_phi(ord_cmd);
  ord_cmd->add_option("--at", at, "Diagonal point for a local order")->delimiter(',');
  ord_cmd->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = load_phi(phi_path);
      Json rep = header("ord", seed);
      if (!at.empty()) {
        require(at.size() == phi.n, "--at needs n coordinates");
        std::vector<Rational> pv = params.empty() ? std::vector<Rational>{} : parse_values(params);
        auto q_local = local_order(phi, parse_values(at), pv);
        rep["q"] = q_local ? Json(*q_local) : Json(nullptr);
        rep["identically_zero"] = !q_local.has_value();
        rep["at"] = at;
        return rep;
      }
      auto e = params.empty() ? order_of_vanishing(phi) : order_of_vanishing_at(phi, parse_values(params));
      merge(rep, report_json(e, phi));
      return rep;
    };
  });

  // density
  auto* dens = app.add_subcommand("density", "Density of the Phi-Hausdorff measure");
  dens->require_subcommand(1);
  auto add_density_opts = [&](CLI::App* sub) {
    add_phi(sub);
    sub->add_option("--q", q, "Order (default: order of vanishing)");
    sub->add_option("--at,--point", at, "Base point (default: origin)")->delimiter(',');
    sub->add_option("--starts,--budget", starts, "Nelder-Mead starts");
    sub->add_option("--iterations", iterations, "Iterations per start");
    sub->add_option("--norm", norm, "max or euclidean")->check(CLI::IsMember({"max", "euclidean"}));
  };
  auto density_options = [&](std::uint64_t seed) {
    DensityOptions d;
    d.seed = seed;
    d.starts = starts;
    d.iterations = iterations;
    d.o_samples = samples;
    d.norm = norm_from(norm);
    d.threads = common.threads;
    return d;
  };
  auto* dens_eval = dens->add_subcommand("eval", "Upper estimate of the density infimum");
  add_density_opts(dens_eval);
  dens_eval->add_flag("--positivity", with_positivity, "Also run the exponent-cloud criterion");
  dens_eval->add_option("--samples", samples, "Sampled frames for the criterion");
  dens_eval->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      DensityOptions d = density_options(seed);
      d.run_positivity = with_positivity;
      auto r = density_infimum(phi, resolve_q(phi, q), base_point(phi, at), d);
      Json rep = header("density eval", seed);
      merge(rep, report_json(r));
      return rep;
    };
  });
  auto* dens_pos = dens->add_subcommand("positivity", "Exponent-cloud positivity verdict with witness");
  add_density_opts(dens_pos);
  dens_pos->add_option("--samples", samples, "Sampled frames");
  dens_pos->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      auto p = positivity_criterion(phi, resolve_q(phi, q), base_point(phi, at), samples, density_options(seed));
      Json rep = header("density positivity", seed);
      rep["positivity"] = to_string(p.verdict);
      Json cert = report_json(p.witness);
      // Zero verdicts report the log-scaling direction along which the
      // density objective decays; positive ones the convex weights.
      if (p.witness.kind == HullWitness::Kind::separator) {
        rep["witness"] = plain_numbers(cert["descent_direction"]);
        rep["descent_direction"] = cert["descent_direction"];
      } else if (p.witness.kind == HullWitness::Kind::weights) {
        rep["witness"] = plain_numbers(cert["weights"]);
      } else {
        rep["witness"] = nullptr;
      }
      rep["witness_kind"] = cert["kind"];
      rep["certificate"] = cert;
      rep["sampled_frames"] = p.sampled_frames;
      rep["robust_passes"] = p.robust_passes;
      rep["identity_member"] = p.identity_member;
      return rep;
    };
  });
  auto* dens_multi = dens->add_subcommand("multisys", "Restricted density over a family of coordinate systems");
  add_density_opts(dens_multi);
  std::string s_text = "1";
  unsigned cap_N = 1;
  dens_multi->add_option("--s", s_text, "Exponent s (rational)")->required();
  dens_multi->add_option("--cap", cap_N, "Per-slot derivative cap N")->required();
  dens_multi->add_option("--family", family_path, "Coordinate changes JSON")->check(CLI::ExistingFile);
  dens_multi->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      std::vector<CoordinateChange> family;
      if (!family_path.empty()) {
        Json f = read_json_file(family_path);
        for (const auto& c : f.at("changes")) {
          CoordinateChange cc;
          cc.name = c.value("name", "change");
          std::vector<std::string> names;
          for (std::size_t i = 0; i < phi.n; ++i) names.push_back("z" + std::to_string(i + 1));
          if (c.contains("variables")) names = c.at("variables").get<std::vector<std::string>>();
          std::vector<Polynomial> comps;
          for (const auto& e : c.at("map")) comps.push_back(parse_polynomial(e.get<std::string>(), names));
          cc.map = PolyVector(std::move(comps));
          family.push_back(std::move(cc));
        }
      }
      auto r = multisystem_density(phi, parse_rational(s_text), cap_N, family, base_point(phi, at), density_options(seed));
      Json rep = header("density multisys", seed);
      merge(rep, report_json(r));
      rep["s"] = s_text;
      rep["cap"] = cap_N;
      return rep;
    };
  });
  auto* dens_tri = dens->add_subcommand("triangular", "Determinantal lower bound for random lower-triangular T");
  std::size_t nprime = 2, tri_samples = 50;
  dens_tri->add_option("--nprime", nprime, "Matrix size n'");
  dens_tri->add_option("--samples", tri_samples, "Random T to test");
  dens_tri->callback([&] {
    action = [&](std::uint64_t seed) {
      const std::size_t N = nprime * nprime;
      Json rows = Json::array();
      std::size_t failures = 0;
      for (std::size_t i = 0; i < tri_samples; ++i) {
        Rng rng = make_rng(seed, i);
        std::uniform_real_distribution<double> u(-1.0, 1.0), mag(0.25, 4.0);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
        for (std::size_t r = 0; r < N; ++r) {
          for (std::size_t c = 0; c < r; ++c) T(r, c) = u(rng);
          T(r, r) = mag(rng) * (u(rng) < 0 ? -1 : 1);
        }
        auto b = triangular_determinantal_bound(nprime, T);
        if (!b.holds) ++failures;
        rows.push_back(report_json(b));
      }
      Json rep = header("density triangular", seed);
      rep["nprime"] = nprime;
      rep["rows"] = rows;
      rep["failures"] = failures;
      rep["basis"] = "stated";
      if (failures) failure = std::to_string(failures) + " triangular bounds failed";
      return rep;
    };
  });

  // func
  auto* func = app.add_subcommand("func", "Nonconcentration functionals S and A");
  func->require_subcommand(1);
  auto* func_sup = func->add_subcommand("sup", "Sup functional S(E)");
  add_phi(func_sup);
  func_sup->add_option("--set", set_path, "Set JSON file")->required()->check(CLI::ExistingFile);
  func_sup->add_option("--budget", budget, "Sampled k-tuples");
  func_sup->add_option("--norm", norm, "max or euclidean")->check(CLI::IsMember({"max", "euclidean"}));
  func_sup->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      SupOptions o;
      o.seed = seed;
      o.threads = common.threads;
      o.norm = norm_from(norm);
      if (budget) o.budget = budget;
      Json rep = header("func sup", seed);
      merge(rep, report_json(sup_functional(phi, set_from_json(read_json_file(set_path)), o)));
      return rep;
    };
  });
  bool stratified = false;
  auto* func_int = func->add_subcommand("int", "Integral functional A(E)");
  add_phi(func_int);
  func_int->add_option("--set", set_path, "Set JSON file")->required()->check(CLI::ExistingFile);
  func_int->add_option("--measure", measure_path, "Measure JSON file (default Lebesgue)")->check(CLI::ExistingFile);
  func_int->add_option("--budget", budget, "Monte Carlo samples");
  func_int->add_flag("--stratified", stratified, "Stratified sampling on boxes");
  func_int->add_option("--norm", norm, "max or euclidean")->check(CLI::IsMember({"max", "euclidean"}));
  auto load_measure = [&] {
    return measure_path.empty() ? MeasureSpec::lebesgue() : measure_from_json(read_json_file(measure_path));
  };
  func_int->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      IntOptions o;
      o.seed = seed;
      o.threads = common.threads;
      o.stratified = stratified;
      o.norm = norm_from(norm);
      if (budget) o.budget = budget;
      Json rep = header("func int", seed);
      merge(rep, report_json(int_functional(phi, load_measure(), set_from_json(read_json_file(set_path)), o)));
      return rep;
    };
  });
  auto* func_sweep = func->add_subcommand("sweep", "Constants c' = S/mu^s and c = A/mu^(k+s) over a family");
  add_phi(func_sweep);
  std::string sweep_s = "1";
  std::size_t sup_budget = 0;
  func_sweep->add_option("--family", family_path, "JSON with \"sets\": [...]")->required()->check(CLI::ExistingFile);
  func_sweep->add_option("--s", sweep_s, "Exponent s")->required();
  func_sweep->add_option("--measure", measure_path, "Measure JSON file (default Lebesgue)")->check(CLI::ExistingFile);
  func_sweep->add_option("--budget", budget, "Integral samples per set");
  func_sweep->add_option("--sup-budget", sup_budget, "Sup samples per set");
  func_sweep->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      std::vector<SetSpec> family;
      const Json sets = read_json_file(family_path).at("sets");
      for (const auto& s : sets) family.push_back(set_from_json(s));
      SupOptions so;
      so.seed = seed;
      so.threads = common.threads;
      if (sup_budget) so.budget = sup_budget;
      IntOptions io;
      io.seed = seed;
      io.threads = common.threads;
      if (budget) io.budget = budget;
      auto r = constant_sweep(phi, load_measure(), family, parse_rational(sweep_s).get_d(), so, io);
      Json rep = header("func sweep", seed);
      merge(rep, report_json(r));
      rep["basis"] = "stated";
      if (!r.chain_ok) failure = "min c exceeds min c' beyond 3 standard errors";
      return rep;
    };
  });
  auto* func_cheb = func->add_subcommand("cheb", "Chebyshev set for a discrete measure");
  unsigned degree = 1;
  double tau = 2;
  std::size_t restarts = 16, tests = 100;
  func_cheb->add_option("--measure", measure_path, "Discrete measure JSON")->required()->check(CLI::ExistingFile);
  func_cheb->add_option("--degree", degree, "Polynomial degree d")->required();
  func_cheb->add_option("--tau", tau, "Threshold tau > 1")->required();
  func_cheb->add_option("--restarts", restarts, "Coordinate-ascent restarts");
  func_cheb->add_option("--tests", tests, "Random test polynomials");
  func_cheb->callback([&] {
    action = [&](std::uint64_t seed) {
      ChebyshevOptions o;
      o.seed = seed;
      o.restarts = restarts;
      o.tests = tests;
      auto r = chebyshev_set(load_measure(), degree, tau, o);
      Json rep = header("func cheb", seed);
      merge(rep, report_json(r));
      rep["basis"] = "stated";
      if (!r.complement_ok || !r.bound_ok) failure = "Chebyshev set conclusions failed";
      return rep;
    };
  });

  // haus
  auto* haus = app.add_subcommand("haus", "Dyadic cover estimates");
  haus->require_subcommand(1);
  std::vector<double> lo, hi;
  unsigned level = 4;
  double sigma = 1;
  auto add_box = [&](CLI::App* sub) {
    sub->add_option("--box", box_path, "Box JSON file")->check(CLI::ExistingFile);
    sub->add_option("--lo", lo, "Box lower corner")->delimiter(',');
    sub->add_option("--hi", hi, "Box upper corner")->delimiter(',');
    sub->add_option("--level", level, "Dyadic level (2^level cells per axis)");
  };
  auto cover_options = [&](std::uint64_t seed) {
    CoverOptions c;
    c.sup.seed = seed;
    c.threads = common.threads;
    if (budget) c.sup.budget = budget;
    return c;
  };
  auto* haus_cover = haus->add_subcommand("cover", "Upper cover value sum S(cell)^sigma");
  add_phi(haus_cover);
  add_box(haus_cover);
  haus_cover->add_option("--sigma", sigma, "Exponent sigma")->required();
  haus_cover->add_option("--budget", budget, "Sup samples per cell");
  haus_cover->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      auto c = cover_upper(phi, sigma, box_from_args(box_path, lo, hi), level, cover_options(seed));
      Json rep = header("haus cover", seed);
      merge(rep, report_json(c));
      return rep;
    };
  });
  auto* haus_cmp = haus->add_subcommand("compare", "Cover value against the integrated density");
  add_phi(haus_cmp);
  add_box(haus_cmp);
  haus_cmp->add_option("--q", q, "Order (default: order of vanishing)");
  haus_cmp->add_option("--starts", starts, "Density optimizer starts");
  haus_cmp->add_option("--budget", budget, "Sup samples per cell");
  haus_cmp->callback([&] {
    action = [&](std::uint64_t seed) {
      PhiSpec phi = frozen_phi(load_phi(phi_path), params);
      DensityOptions d;
      d.seed = seed;
      d.starts = starts;
      d.threads = common.threads;
      auto c = density_comparability_check(phi, resolve_q(phi, q), box_from_args(box_path, lo, hi), level, d,
                                           cover_options(seed));
      Json rep = header("haus compare", seed);
      merge(rep, report_json(c));
      return rep;
    };
  });

  // radon
  auto* radon = app.add_subcommand("radon", "Radon-like operator bounds at desk scale");
  radon->require_subcommand(1);
  auto* radon_check = radon->add_subcommand("check", "Hypothesis spot check and rho table for a case file");
  std::optional<std::size_t> x_grid, quad_n, spot_samples;
  bool no_doubling = false;
  radon_check->add_option("--case", case_path, "RadonCase JSON file")->required()->check(CLI::ExistingFile);
  radon_check->add_option("--x-grid", x_grid, "Midpoints per x axis");
  radon_check->add_option("--quad-n", quad_n, "Midpoints per t axis");
  radon_check->add_option("--samples", spot_samples, "Hypothesis samples");
  radon_check->add_flag("--no-doubling", no_doubling, "Skip the resolution doubling test");
  radon_check->callback([&] {
    action = [&](std::uint64_t seed) {
      Json cj = read_json_file(case_path);
      RadonCase rc = radon_case_from_json(cj);
      // Family: explicit sets or seeded random box unions.
      std::vector<SetSpec> family;
      const Json& fam = cj.at("family");
      if (fam.contains("sets")) {
        for (const auto& s : fam.at("sets")) family.push_back(set_from_json(s));
      } else {
        const Json& rr = fam.at("random_boxes");
        family = random_box_unions(rr.at("count").get<std::size_t>(), rr.value("max_pieces", std::size_t{4}),
                                   box_from_json(rr.at("bounds")), derive_seed(seed, 7), rr.value("min_side", 0.2),
                                   rr.value("max_side", 0.7));
      }
      LpOptions lo_opts;
      Json lp = cj.value("lp", Json::object());
      lo_opts.x_grid = x_grid.value_or(lp.value("x_grid", lo_opts.x_grid));
      lo_opts.quad_n = quad_n.value_or(lp.value("quad_n", lo_opts.quad_n));
      lo_opts.doubling = !no_doubling && lp.value("doubling", true);
      lo_opts.threads = common.threads;
      const double spread_limit = lp.value("spread_limit", 10.0);

      HypothesisOptions ho;
      ho.seed = derive_seed(seed, 11);
      Json sc = cj.value("spot_check", Json::object());
      ho.samples = spot_samples.value_or(sc.value("samples", ho.samples));
      ho.max_pieces = sc.value("max_pieces", ho.max_pieces);
      ho.integral.threads = common.threads;

      auto hyp = hypothesis_spot_check(rc, ho);
      auto table = lp_ratio_check(rc, family, lo_opts);
      double spread = table.min_rho > 0 ? table.max_rho / table.min_rho : 0.0;
      bool spread_ok = table.min_rho > 0 ? spread <= spread_limit : true;
      Json rep = header("radon check", seed);
      rep["case"] = radon_case_to_json(rc);
      rep["hypothesis"] = report_json(hyp);
      rep["hypothesis"]["basis"] = "derived";
      rep["lp"] = report_json(table);
      rep["lp"]["spread"] = spread;
      rep["lp"]["spread_limit"] = spread_limit;
      rep["lp"]["x_grid"] = lo_opts.x_grid;
      rep["lp"]["quad_n"] = lo_opts.quad_n;
      rep["family_size"] = family.size();
      bool pass = hyp.pass && table.pass && spread_ok;
      rep["pass"] = pass;
      if (!pass) failure = "radon check failed";
      return rep;
    };
  });

  // gallery
  auto* gal = app.add_subcommand("gallery", "Built-in examples");
  gal->require_subcommand(1);
  auto* gal_list = gal->add_subcommand("list", "List entries");
  gal_list->callback([&] {
    action = [&](std::uint64_t seed) {
      Json rep = header("gallery list", seed);
      Json entries = Json::array();
      for (const auto& e : gallery()) entries.push_back(Json{{"name", e.name}, {"description", e.description}, {"q", e.q}});
      rep["entries"] = entries;
      return rep;
    };
  });
  auto* gal_build = gal->add_subcommand("build", "Emit one entry with its expected facts");
  std::string entry_name;
  gal_build->add_option("name", entry_name, "Entry name")->required();
  gal_build->callback([&] {
    action = [&](std::uint64_t seed) {
      Json rep = header("gallery build", seed);
      merge(rep, report_json(gallery_entry(entry_name)));
      return rep;
    };
  });

  // selftest
  auto* self = app.add_subcommand("selftest", "Built-in consistency checks");
  bool quick = false;
  self->add_flag("--quick", quick, "Only the fast checks");
  self->callback([&] {
    action = [&](std::uint64_t seed) {
      Json rep = header("selftest", seed);
      Json rows = Json::array();
      std::size_t failures = 0;
      for (const auto& c : selftest_checks(quick)) {
        bool ok = c.run();
        if (!ok) ++failures;
        rows.push_back(Json{{"name", c.name}, {"basis", c.basis}, {"pass", ok}});
      }
      rep["checks"] = rows;
      rep["failures"] = failures;
      rep["quick"] = quick;
      if (failures) failure = std::to_string(failures) + " self checks failed";
      return rep;
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  }

  auto emit = [&](const Json& rep) {
    std::string text = common.compact ? rep.dump() : rep.dump(2);
    if (common.out_path.empty()) {
      out << text << "\n";
    } else {
      std::ofstream f(common.out_path, std::ios::binary);
      if (!f) throw ValidationError("cannot write " + common.out_path);
      f << text << "\n";
    }
  };

  try {
    std::uint64_t seed = common.resolved_seed();
    emit(action(seed));
    if (failure) {
      err << "check failed: " << *failure << "\n";
      return check_failed;
    }
    return ok;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return internal_error;
  }
}

}  // namespace nonconc::cli
