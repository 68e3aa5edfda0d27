#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonconc/geometry.hpp"

namespace nonconc {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

// Left multiplication by e_1..e_l on the algebra generated by anticommuting
// e_i with e_i^2 = 1, in the basis of blades e_S ordered lexicographically by
// the increasing index tuple S (empty blade first). l in [1, 4].
std::vector<IntMatrix> clifford_matrices(unsigned l);
// Blade index tuples (0-based) in basis order.
std::vector<std::vector<unsigned>> clifford_blades(unsigned l);

// det(A_1 - A_2) on n' x n' matrices, entries row-major.
PhiSpec phi_determinantal(std::size_t nprime);
// det(curve(x_1) - curve(x_k), ..., curve(x_{k-1}) - curve(x_k)); the curve
// maps R^p -> R^{k-1} and column j holds curve(x_j) - curve(x_k).
PhiSpec phi_affine(const PolyVector& curve, std::size_t k);
// det Q(., t_2 - t_1) with entry (i, j) = sum_l Q[i][j][l] a_l. Q[i] must be
// symmetric in its two trailing indices.
using QuadraticForm = std::vector<std::vector<std::vector<Rational>>>;
PhiSpec phi_quadratic(const QuadraticForm& Q);
// curve(x) - curve(y), one component per curve coordinate.
PhiSpec phi_hausdorff(const PolyVector& curve);

// Families whose Jacobian functional reproduces the constructions above.
// gamma(t, (y, x)) = (t, y + M(t) x) where M(t) = sum_j curve_j(t) M_j.
GammaSpec gamma_clifford(unsigned l, const PolyVector& curve);
// gamma(t, (y, x)) = (t, y + t x), t an n' x n' matrix (row-major).
GammaSpec gamma_matrix(std::size_t nprime);
// gamma(t, (y, x)) = (t, y - Q(x - t, x - t)), component i = sum Q[i][j][l] a_j a_l.
GammaSpec gamma_quadratic(const QuadraticForm& Q);
// gamma(t, (y, x)) = (t, y + curve(t) . x), the hypersurface family.
GammaSpec gamma_affine(const PolyVector& curve);

// How an expected fact is known: stated in the source text, derived here by
// an independent computation, or immediate from the definitions.
enum class Basis { stated, derived, trivial };
std::string to_string(Basis b);

struct ExpectedFact {
  std::string key;  // "q", "density", "sigma", ...
  std::string value;
  Basis basis = Basis::derived;
  std::string note;
};

struct GalleryEntry {
  std::string name;
  std::string description;
  std::string parameters;
  PhiSpec phi;
  std::optional<GammaSpec> gamma;
  unsigned q = 0;
  std::vector<ExpectedFact> facts;

  const ExpectedFact* fact(const std::string& key) const;
};

std::vector<std::string> gallery_names();
// Throws ValidationError for an unknown name.
GalleryEntry gallery_entry(const std::string& name);
std::vector<GalleryEntry> gallery();

}  // namespace nonconc
