#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nonconc/geometry.hpp"

namespace nonconc {

// Flat k-tuple of multiindices (alpha_1, ..., alpha_k), length k*n, laid out
// like the Phi variables.
using Multiindex = std::vector<unsigned>;

// Order of vanishing on the diagonal together with the normalised leading
// Taylor coefficients d^alpha Phi(y, ..., y) / alpha! for |alpha| = q.
// Coefficients are polynomials in (y_1..y_n, params).
struct DiagonalExpansion {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t params = 0;
  // nullopt when Phi vanishes identically (infinite order).
  std::optional<unsigned> q;
  std::map<Multiindex, PolyVector> leading;

  bool identically_zero() const { return !q.has_value(); }
};

struct OrderOptions {
  // Re-derive every leading coefficient by direct differentiation and
  // restriction to the diagonal. All alpha with |alpha| = q are checked when
  // there are at most this many, otherwise only the nonzero ones.
  bool cross_check = true;
  std::size_t cross_check_limit = 512;
};

// Global order for generic parameters: substitutes x_j = y + h u_j and finds
// the lowest power of h with a nonzero coefficient.
DiagonalExpansion order_of_vanishing(const PhiSpec& phi, const OrderOptions& opts = {});

// Same, with the parameters frozen at the given values.
DiagonalExpansion order_of_vanishing_at(const PhiSpec& phi, std::span<const Rational> params,
                                        const OrderOptions& opts = {});

// Coefficient of h^d in Phi(y + h u_1, ..., y + h u_k), in variables
// (y (n), u (k*n), params).
PolyVector diagonal_h_coefficient(const PhiSpec& phi, unsigned d);

// Restriction of a polynomial in the Phi variables to the diagonal, in
// variables (y (n), params).
Polynomial restrict_to_diagonal(const PhiSpec& phi, const Polynomial& p);

// Returns Phi with parameters fixed and removed.
PhiSpec freeze_params(const PhiSpec& phi, std::span<const Rational> params);

// Phi(x + w_1, ..., x + w_k) with parameters frozen, in the k*n variables w.
PolyVector taylor_at_diagonal(const PhiSpec& phi, std::span<const Rational> x, std::span<const Rational> params = {});

// Order of vanishing at the single diagonal point (x, ..., x); nullopt when
// Phi is identically zero near it.
std::optional<unsigned> local_order(const PhiSpec& phi, std::span<const Rational> x,
                                    std::span<const Rational> params = {});

// (T^* d)^{alpha_1}_1 ... (T^* d)^{alpha_k}_k Phi(x, ..., x), one entry per
// component. Computed by translating to x, composing every block with T and
// differentiating formally.
std::vector<Rational> diagonal_derivative_exact(const PhiSpec& phi, const RationalMatrix& T, const Multiindex& alpha,
                                                std::span<const Rational> x, std::span<const Rational> params = {});
std::vector<double> diagonal_derivative(const PhiSpec& phi, const RationalMatrix& T, const Multiindex& alpha,
                                        std::span<const Rational> x, std::span<const Rational> params = {});

// Splits a flat multiindex into its k blocks.
std::vector<std::vector<unsigned>> split_multiindex(const Multiindex& alpha, std::size_t n, std::size_t k);

}  // namespace nonconc
