#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

#include "nonconc/density.hpp"
#include "nonconc/diagonal.hpp"
#include "nonconc/functionals.hpp"
#include "nonconc/gallery.hpp"
#include "nonconc/hausdorff.hpp"
#include "nonconc/radon.hpp"

namespace nonconc {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "nonconc/1";

// Parses JSON text; syntax errors become ValidationError with
// "source:line:column" diagnostics.
Json parse_json_text(std::string_view text, std::string_view source = "<input>");
Json read_json_file(const std::string& path);

// Rationals are strings ("3/4", "-2", "0.125") or JSON numbers, read exactly
// from their decimal text.
Rational rational_from_json(const Json& j);
std::vector<Rational> rationals_from_json(const Json& j);
Json rational_to_json(const Rational& r);

// {"n", "k", "params", "variables"?, "components": ["expr", ...]}, or
// {"gallery": NAME}, or {"gamma": {...}, "route": "jacobian" | "wedge"}.
PhiSpec phi_from_json(const Json& j);
Json phi_to_json(const PhiSpec& phi);

// {"n", "N1", "N2", "variables"?, "components": [...]}; default variable
// names are t1..tn, x1..xN2.
GammaSpec gamma_from_json(const Json& j);
Json gamma_to_json(const GammaSpec& g);
std::vector<std::string> gamma_variable_names(const GammaSpec& g);

Box box_from_json(const Json& j);
Json box_to_json(const Box& b);
// {"box": {"lo", "hi"}} | {"affine": {"matrix", "offset", "base"}} |
// {"union": [...]} | {"predicate": {"variables", "constraints", "bbox"}} |
// {"point": [...]}
SetSpec set_from_json(const Json& j);
Json set_to_json(const SetSpec& s);
// {"lebesgue": {}} | {"weighted": {"variables", "density"}} |
// {"discrete": {"points", "weights"}}
MeasureSpec measure_from_json(const Json& j);
Json measure_to_json(const MeasureSpec& m);

// Omega: {"full": {}} | {"set": SET} | {"threshold": {"q", "c"}}.
RadonCase radon_case_from_json(const Json& j);
Json radon_case_to_json(const RadonCase& rc);

Json report_json(const DiagonalExpansion& e, const PhiSpec& phi);
Json report_json(const HullWitness& w);
Json report_json(const PositivityResult& p);
Json report_json(const DensityReport& r);
Json report_json(const MultisystemReport& r);
Json report_json(const TriangularBound& t);
Json report_json(const SupReport& r);
Json report_json(const IntReport& r);
Json report_json(const SweepReport& r);
Json report_json(const ChebyshevResult& r);
Json report_json(const CoverEstimate& c);
Json report_json(const ComparabilityReport& c);
Json report_json(const LpReport& r);
Json report_json(const HypothesisReport& r);
Json report_json(const GalleryEntry& e);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

}  // namespace nonconc
