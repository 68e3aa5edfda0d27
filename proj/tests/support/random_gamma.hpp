#pragma once

#include <random>

#include "nonconc/geometry.hpp"
#include "random_poly.hpp"

namespace nonconc::testing {

// Sparse random family with n, r <= 2, k <= 3 and degree <= 2. The first n
// components are t_i plus a small perturbation so d gamma/dt has full rank
// generically; the remaining r components mix linear x terms with random
// quadratic terms.
inline GammaSpec random_gamma(std::mt19937_64& rng, std::size_t n, std::size_t r, std::size_t k) {
  const std::size_t N2 = r * k;
  const std::size_t nv = n + N2;
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(Polynomial::variable(nv, i) + random_poly(rng, nv, 2, 1));
  std::uniform_int_distribution<std::size_t> xvar(n, nv - 1);
  for (std::size_t i = 0; i < r; ++i) {
    Polynomial c = random_poly(rng, nv, 2, 2);
    for (int rep = 0; rep < 2; ++rep) c += Polynomial::variable(nv, xvar(rng)) * random_nonzero_rational(rng, 3, 2);
    comps.push_back(c);
  }
  GammaSpec g{n, n + r, N2, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

}  // namespace nonconc::testing
