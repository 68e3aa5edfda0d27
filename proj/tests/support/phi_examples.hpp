#pragma once

#include <string>
#include <vector>

#include "nonconc/geometry.hpp"
#include "nonconc/parse.hpp"

namespace nonconc::testing {

inline PhiSpec make_phi(std::size_t n, std::size_t k, std::size_t params, const std::vector<std::string>& vars,
                        const std::vector<std::string>& exprs) {
  std::vector<Polynomial> comps;
  for (const auto& e : exprs) comps.push_back(parse_polynomial(e, vars));
  PhiSpec phi{n, k, params, PolyVector(std::move(comps))};
  phi.validate();
  return phi;
}

inline PhiSpec line_phi() { return make_phi(1, 2, 0, {"x", "y"}, {"x - y"}); }

inline PhiSpec det2_phi() {
  return make_phi(4, 2, 0, {"a11", "a12", "a21", "a22", "b11", "b12", "b21", "b22"},
                  {"(a11 - b11)*(a22 - b22) - (a12 - b12)*(a21 - b21)"});
}

// (x1 - x2)^2 on R^2, two slots.
inline PhiSpec sq_diff_phi() { return make_phi(2, 2, 0, {"x1", "y1", "x2", "y2"}, {"(x1 - x2)^2"}); }

inline PhiSpec mixed_order_phi() {
  return make_phi(2, 2, 0, {"x1", "y1", "x2", "y2"}, {"(x1 - x2)^2 + (y1 - y2)^3"});
}

// gamma(t, x) = (t, x1 + t x2): lines in the plane over t in R.
inline GammaSpec line_gamma() {
  const std::vector<std::string> vars{"t", "x1", "x2"};
  GammaSpec g{1, 2, 2, PolyVector({parse_polynomial("t", vars), parse_polynomial("x1 + t*x2", vars)})};
  g.validate();
  return g;
}

}  // namespace nonconc::testing
