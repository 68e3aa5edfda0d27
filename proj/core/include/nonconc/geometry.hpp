#pragma once

#include <map>
#include <string>
#include <vector>

#include "nonconc/poly.hpp"

namespace nonconc {

// Polynomial family gamma : R^n x R^N2 -> R^N1 with N2 = r*k, r = N1 - n.
// Variables are ordered (t_1..t_n, x_1..x_N2).
struct GammaSpec {
  std::size_t n = 0;
  std::size_t N1 = 0;
  std::size_t N2 = 0;
  PolyVector components;

  std::size_t r() const { return N1 - n; }
  std::size_t k() const { return N2 / r(); }
  void validate() const;
};

// Coefficients of an r-form in dx_1..dx_N2, keyed by strictly increasing
// 0-based index tuples. Absent keys are zero coefficients.
struct RForm {
  std::size_t r = 0;
  std::size_t N2 = 0;
  std::map<std::vector<std::size_t>, Polynomial> coefficients;

  bool is_zero() const { return coefficients.empty(); }
};

// Polynomial map Phi : (R^n)^k -> R^m, optionally depending on `params`
// frozen parameters. Body variables are ordered block by block
// (x_1 in R^n, ..., x_k in R^n) followed by the parameters.
struct PhiSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t params = 0;
  PolyVector body;

  std::size_t m() const { return body.size(); }
  std::size_t nvars() const { return k * n + params; }
  std::size_t var(std::size_t block, std::size_t coord) const { return block * n + coord; }
  std::size_t param_var(std::size_t i) const { return k * n + i; }
  void validate() const;
  // Names such as x1_2 (block 1, coordinate 2) and p1; blocks with n = 1
  // use x1, x2, ...
  std::vector<std::string> variable_names() const;
};

RForm build_omega(const GammaSpec& g);

// All three builders return Phi in the sign convention of the Jacobian
// determinant of (x, t_1, ..., t_k) |-> (gamma(t_1, x), ..., gamma(t_k, x)),
// so the routes agree as exact polynomials. The Phi variables are
// (t_1, ..., t_k) with the family parameters x as frozen parameters.
PhiSpec build_phi_wedge(const GammaSpec& g);
PhiSpec build_phi_jacobian(const GammaSpec& g);
// gamma0 : R^n x R^{rk} -> R^r for the graph family gamma = (t, gamma0).
PhiSpec build_phi_graph(const PolyVector& gamma0, std::size_t n, std::size_t r, std::size_t k);

// Wedge value relative to the Jacobian: wedge = jacobian_to_wedge_sign * Jacobian.
int jacobian_to_wedge_sign(std::size_t n, std::size_t r, std::size_t k);

// Lifts a graph family gamma0 into the full GammaSpec (t, gamma0).
GammaSpec lift_graph(const PolyVector& gamma0, std::size_t n, std::size_t r, std::size_t k);

// Product of the component degrees of the system, an upper bound for the
// number of isolated solutions of gamma(t, x) = y by Bezout.
unsigned long bezout_bound(const GammaSpec& g);

enum class BoundCheck { holds, fails, inconclusive };
std::string to_string(BoundCheck b);

// Whether Phi_{sample_x} vanishes to order at least r(k-1) on the diagonal.
// Inconclusive when omega(., sample_x) vanishes identically.
BoundCheck vanishing_order_bound_check(const GammaSpec& g, std::span<const Rational> sample_x);

}  // namespace nonconc
