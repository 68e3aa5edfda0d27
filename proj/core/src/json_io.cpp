#include "nonconc/json_io.hpp"

#include <fstream>
#include <sstream>

#include "nonconc/error.hpp"
#include "nonconc/parse.hpp"

namespace nonconc {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field \"") + key + "\": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

std::vector<std::string> names_or(const Json& j, std::vector<std::string> fallback) {
  if (!j.contains("variables")) return fallback;
  auto names = get<std::vector<std::string>>(j, "variables");
  require(names.size() == fallback.size(), "\"variables\" has " + std::to_string(names.size()) + " names, expected " +
                                               std::to_string(fallback.size()));
  return names;
}

std::vector<Polynomial> parse_components(const Json& j, const std::vector<std::string>& names) {
  const Json& comps = field(j, "components");
  require(comps.is_array() && !comps.empty(), "\"components\" must be a nonempty array of expressions");
  std::vector<Polynomial> out;
  for (const auto& c : comps) {
    require(c.is_string(), "components must be expression strings");
    out.push_back(parse_polynomial(c.get<std::string>(), names));
  }
  return out;
}

std::vector<std::string> numbered(const std::string& stem, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

Json strings(const PolyVector& v, std::span<const std::string> names) {
  Json a = Json::array();
  for (const auto& c : v.components()) a.push_back(to_string(c, names));
  return a;
}

Json rationals_json(std::span<const Rational> v) {
  Json a = Json::array();
  for (const auto& r : v) a.push_back(to_string(r));
  return a;
}

}  // namespace

Json parse_json_text(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    // Drop nlohmann's own "[json.exception.parse_error.101] parse error at ..." prefix.
    auto pos = what.find(": ");
    if (pos != std::string::npos) what = what.substr(pos + 2);
    throw ValidationError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON: " + what);
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return parse_rational(j.dump());
  // Decimal text of the double, so 0.1 is read as 1/10.
  if (j.is_number_float()) return parse_rational(j.dump());
  throw ValidationError("expected a rational (string or number), got " + j.dump());
}

std::vector<Rational> rationals_from_json(const Json& j) {
  require(j.is_array(), "expected an array of rationals");
  std::vector<Rational> out;
  for (const auto& v : j) out.push_back(rational_from_json(v));
  return out;
}

Json rational_to_json(const Rational& r) {
  Rational c(r);
  c.canonicalize();
  return to_string(c);
}

PhiSpec phi_from_json(const Json& j) {
  require(j.is_object(), "phi must be a JSON object");
  if (j.contains("gallery")) return gallery_entry(get<std::string>(j, "gallery")).phi;
  if (j.contains("gamma")) {
    GammaSpec g = gamma_from_json(j.at("gamma"));
    auto route = get_or<std::string>(j, "route", "jacobian");
    if (route == "jacobian") return build_phi_jacobian(g);
    if (route == "wedge") return build_phi_wedge(g);
    throw ValidationError("unknown route \"" + route + "\" (jacobian or wedge)");
  }
  PhiSpec phi;
  phi.n = get<std::size_t>(j, "n");
  phi.k = get<std::size_t>(j, "k");
  phi.params = get_or<std::size_t>(j, "params", 0);
  require(phi.n >= 1 && phi.k >= 1, "phi needs n >= 1 and k >= 1");
  auto names = names_or(j, phi.variable_names());
  phi.body = PolyVector(parse_components(j, names));
  phi.validate();
  return phi;
}

Json phi_to_json(const PhiSpec& phi) {
  auto names = phi.variable_names();
  return Json{{"n", phi.n},
              {"k", phi.k},
              {"params", phi.params},
              {"variables", names},
              {"components", strings(phi.body, names)}};
}

std::vector<std::string> gamma_variable_names(const GammaSpec& g) {
  auto names = numbered("t", g.n);
  for (auto& x : numbered("x", g.N2)) names.push_back(std::move(x));
  return names;
}

GammaSpec gamma_from_json(const Json& j) {
  require(j.is_object(), "gamma must be a JSON object");
  if (j.contains("gallery")) {
    auto e = gallery_entry(get<std::string>(j, "gallery"));
    require(e.gamma.has_value(), "gallery entry " + e.name + " has no family");
    return *e.gamma;
  }
  GammaSpec g;
  g.n = get<std::size_t>(j, "n");
  g.N1 = get<std::size_t>(j, "N1");
  g.N2 = get<std::size_t>(j, "N2");
  require(g.n >= 1 && g.N1 > g.n && g.N2 >= 1, "gamma needs N1 > n >= 1 and N2 >= 1");
  auto names = names_or(j, gamma_variable_names(g));
  g.components = PolyVector(parse_components(j, names));
  g.validate();
  return g;
}

Json gamma_to_json(const GammaSpec& g) {
  auto names = gamma_variable_names(g);
  return Json{{"n", g.n}, {"N1", g.N1}, {"N2", g.N2}, {"variables", names}, {"components", strings(g.components, names)}};
}

Box box_from_json(const Json& j) {
  Box b{get<std::vector<double>>(j, "lo"), get<std::vector<double>>(j, "hi")};
  require(b.lo.size() == b.hi.size() && !b.lo.empty(), "box lo/hi must be nonempty and of equal length");
  for (std::size_t i = 0; i < b.lo.size(); ++i) require(b.lo[i] <= b.hi[i], "box needs lo <= hi");
  return b;
}

Json box_to_json(const Box& b) { return Json{{"lo", b.lo}, {"hi", b.hi}}; }

Eigen::MatrixXd matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a nonempty array of rows");
  const std::size_t rows = j.size(), cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    require(j.at(r).is_array() && j.at(r).size() == cols, "matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

SetSpec set_from_json(const Json& j) {
  require(j.is_object() && j.size() == 1, "a set is an object with exactly one of box, affine, union, predicate, point");
  if (j.contains("box")) {
    Box b = box_from_json(j.at("box"));
    return SetSpec::box(b.lo, b.hi);
  }
  if (j.contains("affine")) {
    const Json& a = j.at("affine");
    return SetSpec::affine(matrix_from_json(field(a, "matrix")), get<std::vector<double>>(a, "offset"),
                           box_from_json(field(a, "base")));
  }
  if (j.contains("union")) {
    std::vector<SetSpec> parts;
    for (const auto& p : j.at("union")) parts.push_back(set_from_json(p));
    return SetSpec::set_union(std::move(parts));
  }
  if (j.contains("predicate")) {
    const Json& p = j.at("predicate");
    Box bbox = box_from_json(field(p, "bbox"));
    auto names = names_or(p, numbered("v", bbox.dim()));
    std::vector<Polynomial> cons;
    for (const auto& c : field(p, "constraints")) cons.push_back(parse_polynomial(c.get<std::string>(), names));
    return SetSpec::predicate(std::move(cons), std::move(bbox));
  }
  if (j.contains("point")) return SetSpec::point(j.at("point").get<std::vector<double>>());
  throw ValidationError("unknown set kind in " + j.dump());
}

Json set_to_json(const SetSpec& s) {
  switch (s.kind()) {
    case SetSpec::Kind::box:
      return Json{{"box", box_to_json(s.base())}};
    case SetSpec::Kind::affine:
      return Json{{"affine", {{"matrix", matrix_to_json(s.matrix())}, {"offset", s.offset()}, {"base", box_to_json(s.base())}}}};
    case SetSpec::Kind::set_union: {
      Json parts = Json::array();
      for (const auto& p : s.parts()) parts.push_back(set_to_json(p));
      return Json{{"union", parts}};
    }
    case SetSpec::Kind::predicate: {
      auto names = numbered("v", s.dim());
      Json cons = Json::array();
      for (const auto& c : s.constraints()) cons.push_back(to_string(c, names));
      return Json{{"predicate", {{"variables", names}, {"constraints", cons}, {"bbox", box_to_json(s.base())}}}};
    }
  }
  return Json{};
}

MeasureSpec measure_from_json(const Json& j) {
  require(j.is_object() && j.size() == 1, "a measure is an object with exactly one of lebesgue, weighted, discrete");
  if (j.contains("lebesgue")) return MeasureSpec::lebesgue();
  if (j.contains("weighted")) {
    const Json& w = j.at("weighted");
    auto names = get<std::vector<std::string>>(w, "variables");
    return MeasureSpec::weighted(parse_polynomial(get<std::string>(w, "density"), names));
  }
  if (j.contains("discrete")) {
    const Json& d = j.at("discrete");
    auto points = get<std::vector<std::vector<double>>>(d, "points");
    std::vector<double> weights = d.contains("weights") ? get<std::vector<double>>(d, "weights")
                                                        : std::vector<double>(points.size(), 1.0 / points.size());
    return MeasureSpec::discrete(std::move(points), std::move(weights));
  }
  throw ValidationError("unknown measure kind in " + j.dump());
}

Json measure_to_json(const MeasureSpec& m) {
  switch (m.kind()) {
    case MeasureSpec::Kind::lebesgue:
      return Json{{"lebesgue", Json::object()}};
    case MeasureSpec::Kind::weighted: {
      auto names = numbered("v", m.density().nvars());
      return Json{{"weighted", {{"variables", names}, {"density", to_string(m.density(), names)}}}};
    }
    case MeasureSpec::Kind::discrete:
      return Json{{"discrete", {{"points", m.points()}, {"weights", m.weights()}}}};
  }
  return Json{};
}

RadonCase radon_case_from_json(const Json& j) {
  RadonCase rc;
  rc.name = get_or<std::string>(j, "name", "case");
  rc.gamma = gamma_from_json(field(j, "gamma"));
  rc.s = get<double>(j, "s");
  // Numbers are taken as doubles so cases round trip; strings are exact.
  const Json& delta = field(j, "delta");
  rc.delta = delta.is_number() ? delta.get<double>() : rational_from_json(delta).get_d();
  rc.t_window = box_from_json(field(j, "t_window"));
  rc.x_window = box_from_json(field(j, "x_window"));
  rc.cap = get_or<double>(j, "cap", 10.0);
  rc.hypothesis = get_or<std::string>(j, "hypothesis", "");
  if (j.contains("omega")) {
    const Json& o = j.at("omega");
    require(o.is_object() && o.size() == 1, "omega is an object with exactly one of full, set, threshold");
    if (o.contains("full")) {
      rc.omega = OmegaRule::full();
    } else if (o.contains("set")) {
      rc.omega = OmegaRule::from_set(set_from_json(o.at("set")));
    } else if (o.contains("threshold")) {
      const Json& t = o.at("threshold");
      DensityOptions d;
      d.starts = get_or<std::size_t>(t, "starts", 8);
      rc.omega = build_omega_tilde(rc.gamma, get<unsigned>(t, "q"), get<double>(t, "c"), rc.delta, d);
    } else {
      throw ValidationError("unknown omega kind in " + o.dump());
    }
  }
  return rc;
}

Json radon_case_to_json(const RadonCase& rc) {
  Json omega;
  switch (rc.omega.kind()) {
    case OmegaRule::Kind::full:
      omega = Json{{"full", Json::object()}};
      break;
    case OmegaRule::Kind::set:
      omega = Json{{"set", set_to_json(*rc.omega.set())}};
      break;
    case OmegaRule::Kind::density_threshold:
      omega = Json{{"threshold", {{"q", rc.omega.q()}, {"level", rc.omega.level()}}}};
      break;
  }
  return Json{{"name", rc.name},       {"gamma", gamma_to_json(rc.gamma)},
              {"omega", omega},        {"s", rc.s},
              {"delta", rc.delta},     {"t_window", box_to_json(rc.t_window)},
              {"x_window", box_to_json(rc.x_window)}, {"cap", rc.cap},
              {"hypothesis", rc.hypothesis}};
}

Json report_json(const DiagonalExpansion& e, const PhiSpec& phi) {
  Json j{{"n", e.n}, {"k", e.k}, {"params", e.params}, {"identically_zero", e.identically_zero()}};
  j["q"] = e.q ? Json(*e.q) : Json(nullptr);
  auto names = numbered("y", phi.n);
  for (auto& p : numbered("p", phi.params)) names.push_back(std::move(p));
  Json leading = Json::array();
  for (const auto& [alpha, coeffs] : e.leading) leading.push_back(Json{{"alpha", alpha}, {"coefficients", strings(coeffs, names)}});
  j["leading"] = leading;
  return j;
}

Json report_json(const HullWitness& w) {
  Json j;
  switch (w.kind) {
    case HullWitness::Kind::none:
      j["kind"] = "none";
      break;
    case HullWitness::Kind::weights:
      j["kind"] = "weights";
      j["weights"] = rationals_json(w.weights);
      break;
    case HullWitness::Kind::separator: {
      j["kind"] = "separator";
      j["separator"] = rationals_json(w.separator);
      // Scaling the axes along -separator shrinks the objective.
      std::vector<Rational> descent;
      for (const auto& r : w.separator) descent.push_back(-r);
      j["descent_direction"] = rationals_json(descent);
      j["margin"] = to_string(w.margin);
      break;
    }
  }
  j["cloud"] = w.cloud;
  j["frame"] = w.frame;
  j["exact_frame"] = w.exact_frame;
  return j;
}

Json report_json(const PositivityResult& p) {
  return Json{{"positivity", to_string(p.verdict)},
              {"sampled_frames", p.sampled_frames},
              {"robust_passes", p.robust_passes},
              {"identity_member", p.identity_member},
              {"witness", report_json(p.witness)}};
}

Json report_json(const DensityReport& r) {
  Json j{{"point", r.point},   {"n", r.n},       {"q", r.q},
         {"upper", r.upper},   {"certificate_T", matrix_to_json(r.certificate_T)},
         {"seed", r.seed},     {"starts", r.starts}, {"iterations", r.iterations},
         {"evaluations", r.evaluations}, {"norm", to_string(r.norm)}};
  if (r.positivity) j["positivity"] = report_json(*r.positivity);
  return j;
}

Json report_json(const MultisystemReport& r) {
  return Json{{"value", r.value},
              {"best_member", r.best_member},
              {"member_values", r.member_values},
              {"certificate_T", matrix_to_json(r.certificate_T)},
              {"seed", r.seed}};
}

Json report_json(const TriangularBound& t) {
  return Json{{"max_derivative", t.max_derivative}, {"det_root", t.det_root}, {"holds", t.holds}};
}

Json report_json(const SupReport& r) {
  return Json{{"S", r.value}, {"argmax", r.argmax}, {"evaluated", r.evaluated}, {"seed", r.seed}};
}

Json report_json(const IntReport& r) {
  return Json{{"A", r.value},      {"std_error", r.std_error}, {"mu_E", r.mu_E},
              {"samples", r.samples}, {"exact", r.exact},      {"seed", r.seed}};
}

Json report_json(const SweepReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"mu_E", row.mu_E},
                        {"S", row.S},
                        {"A", row.A},
                        {"A_std_error", row.A_stderr},
                        {"c_prime", row.c_prime},
                        {"c", row.c},
                        {"c_std_error", row.c_stderr},
                        {"chain_ok", row.chain_ok},
                        {"skipped", row.skipped},
                        {"warning", row.warning}});
  return Json{{"rows", rows},
              {"s", r.s},
              {"k", r.k},
              {"min_c_prime", r.min_c_prime},
              {"min_c", r.min_c},
              {"min_c_std_error", r.min_c_stderr},
              {"argmin_c_prime", r.argmin_c_prime},
              {"argmin_c", r.argmin_c},
              {"chain_ok", r.chain_ok},
              {"seed", r.seed}};
}

Json report_json(const ChebyshevResult& r) {
  std::size_t inside = 0;
  for (bool b : r.in_E) inside += b ? 1 : 0;
  return Json{{"nvars", r.nvars},
              {"degree", r.degree},
              {"dim_space", r.dim_space},
              {"dim", r.dim},
              {"monomials", r.monomials},
              {"basis", r.basis},
              {"vanishing", r.vanishing},
              {"log_abs_det", r.log_abs_det},
              {"tau", r.tau},
              {"atoms_in_E", inside},
              {"in_E", r.in_E},
              {"mu_total", r.mu_total},
              {"mu_complement", r.mu_complement},
              {"complement_ok", r.complement_ok},
              {"max_cramer", r.max_cramer},
              {"max_ratio", r.max_ratio},
              {"tests", r.tests},
              {"bound_ok", r.bound_ok},
              {"seed", r.seed}};
}

Json report_json(const CoverEstimate& c) {
  return Json{{"sigma", c.sigma},   {"delta", c.delta}, {"value", c.value},
              {"levels", c.levels}, {"cells", c.cells}, {"translation_shortcut", c.translation_shortcut},
              {"seed", c.seed}};
}

Json report_json(const ComparabilityReport& c) {
  Json j{{"q", c.q},
         {"sigma", c.sigma},
         {"level", c.level},
         {"isotropic", report_json(c.isotropic)},
         {"best", report_json(c.best)},
         {"riemann", c.riemann},
         {"density_constant", c.density_constant},
         {"density_zero", c.density_zero}};
  j["ratio"] = c.ratio ? Json(*c.ratio) : Json(nullptr);
  return j;
}

Json report_json(const LpReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json jr{{"measure", row.measure},
            {"norm", row.norm},
            {"refined_norm", row.refined_norm},
            {"resolution_warning", row.resolution_warning}};
    jr["rho"] = row.rho ? Json(*row.rho) : Json(nullptr);
    rows.push_back(std::move(jr));
  }
  return Json{{"rows", rows},          {"p", r.p},           {"max_rho", r.max_rho}, {"min_rho", r.min_rho},
              {"argmax", r.argmax},    {"warnings", r.warnings}, {"pass", r.pass}};
}

Json report_json(const HypothesisReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back(Json{{"x", s.x},
                           {"measure", s.measure},
                           {"integral", s.integral},
                           {"std_error", s.std_error},
                           {"required", s.required},
                           {"holds", s.holds}});
  return Json{{"samples", samples}, {"failures", r.failures}, {"pass", r.pass}, {"seed", r.seed}};
}

Json report_json(const GalleryEntry& e) {
  Json facts = Json::array();
  for (const auto& f : e.facts)
    facts.push_back(Json{{"key", f.key}, {"value", f.value}, {"basis", to_string(f.basis)}, {"note", f.note}});
  Json j{{"name", e.name},
         {"description", e.description},
         {"parameters", e.parameters},
         {"q", e.q},
         {"phi", phi_to_json(e.phi)},
         {"facts", facts}};
  if (e.gamma) j["gamma"] = gamma_to_json(*e.gamma);
  return j;
}

}  // namespace nonconc
