#include "nonconc/geometry.hpp"

#include <algorithm>
#include <numeric>

#include "nonconc/diagonal.hpp"
#include "nonconc/error.hpp"

namespace nonconc {

void GammaSpec::validate() const {
  require(n >= 1, "GammaSpec: n must be positive");
  require(N1 > n, "GammaSpec: N1 must exceed n (r = N1 - n > 0)");
  require(N2 >= 1 && N2 % r() == 0, "GammaSpec: N2 must be a positive multiple of r = N1 - n");
  require(components.size() == N1, "GammaSpec: expected N1 components");
  require(components.nvars() == n + N2, "GammaSpec: components must have n + N2 variables");
}

void PhiSpec::validate() const {
  require(n >= 1 && k >= 1, "PhiSpec: n and k must be positive");
  require(body.size() >= 1, "PhiSpec: body must have at least one component");
  require(body.nvars() == nvars(), "PhiSpec: body variable count must equal k*n + params");
}

std::vector<std::string> PhiSpec::variable_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i)
      names.push_back(n == 1 ? "x" + std::to_string(j + 1) : "x" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < params; ++i) names.push_back("p" + std::to_string(i + 1));
  return names;
}

namespace {

// Entry (row, col) of the partial derivative matrix d gamma / d var.
PolyMatrix jacobian_columns(const GammaSpec& g) {
  // cols[v][row] = d gamma_row / d var_v for all n + N2 variables
  PolyMatrix cols(g.n + g.N2, std::vector<Polynomial>(g.N1));
  for (std::size_t v = 0; v < g.n + g.N2; ++v)
    for (std::size_t row = 0; row < g.N1; ++row) cols[v][row] = partial(g.components[row], v);
  return cols;
}

// All strictly increasing r-subsets of {0..N-1} in lexicographic order.
std::vector<std::vector<std::size_t>> subsets(std::size_t N, std::size_t r) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(r);
  std::iota(cur.begin(), cur.end(), 0);
  if (r > N) return out;
  while (true) {
    out.push_back(cur);
    std::size_t i = r;
    while (i > 0 && cur[i - 1] == N - r + i - 1) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < r; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

int permutation_sign(const std::vector<std::size_t>& seq) {
  int sign = 1;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) sign = -sign;
  return sign;
}

// Maps a polynomial in (t, x) into Phi variables with t placed in block j.
Polynomial at_block(const Polynomial& p, std::size_t n, std::size_t N2, std::size_t k, std::size_t j) {
  std::vector<std::size_t> map(n + N2);
  for (std::size_t i = 0; i < n; ++i) map[i] = j * n + i;
  for (std::size_t i = 0; i < N2; ++i) map[n + i] = k * n + i;
  return embed(p, k * n + N2, map);
}

PhiSpec scalar_phi(std::size_t n, std::size_t k, std::size_t params, Polynomial body) {
  PhiSpec phi;
  phi.n = n;
  phi.k = k;
  phi.params = params;
  phi.body = PolyVector({std::move(body)});
  return phi;
}

}  // namespace

RForm build_omega(const GammaSpec& g) {
  g.validate();
  const std::size_t r = g.r();
  auto cols = jacobian_columns(g);
  RForm form;
  form.r = r;
  form.N2 = g.N2;
  for (const auto& I : subsets(g.N2, r)) {
    // Square N1 x N1 matrix with columns d gamma/dx_I followed by d gamma/dt.
    PolyMatrix m(g.N1, std::vector<Polynomial>(g.N1));
    for (std::size_t row = 0; row < g.N1; ++row) {
      for (std::size_t c = 0; c < r; ++c) m[row][c] = cols[g.n + I[c]][row];
      for (std::size_t c = 0; c < g.n; ++c) m[row][r + c] = cols[c][row];
    }
    Polynomial d = det_poly_matrix(m);
    if (!d.is_zero()) form.coefficients.emplace(I, std::move(d));
  }
  return form;
}

int jacobian_to_wedge_sign(std::size_t n, std::size_t r, std::size_t k) {
  return ((n * r * (k * (k - 1) / 2)) % 2) ? -1 : 1;
}

PhiSpec build_phi_wedge(const GammaSpec& g) {
  g.validate();
  const std::size_t n = g.n, r = g.r(), k = g.k(), N2 = g.N2;
  const std::size_t nv = k * n + N2;
  RForm omega = build_omega(g);
  std::vector<std::vector<std::pair<std::vector<std::size_t>, Polynomial>>> per_block(k);
  for (std::size_t j = 0; j < k; ++j)
    for (const auto& [I, c] : omega.coefficients) per_block[j].emplace_back(I, at_block(c, n, N2, k, j));

  // Enumerate ordered partitions I_1, ..., I_k of {0..N2-1} with |I_j| = r by
  // depth-first choice of each block among the unused indices.
  PolyAccumulator acc(nv);
  std::vector<std::size_t> concat;
  std::vector<bool> used(N2, false);
  std::vector<const Polynomial*> factors;
  auto recurse = [&](auto&& self, std::size_t j) -> void {
    if (j == k) {
      Polynomial prod = *factors[0];
      for (std::size_t b = 1; b < k && !prod.is_zero(); ++b) prod = prod * *factors[b];
      acc.add(prod, Rational(permutation_sign(concat)));
      return;
    }
    for (const auto& [I, c] : per_block[j]) {
      if (std::any_of(I.begin(), I.end(), [&](std::size_t i) { return used[i]; })) continue;
      for (auto i : I) used[i] = true;
      concat.insert(concat.end(), I.begin(), I.end());
      factors.push_back(&c);
      self(self, j + 1);
      factors.pop_back();
      concat.resize(concat.size() - r);
      for (auto i : I) used[i] = false;
    }
  };
  recurse(recurse, 0);
  Polynomial wedge = std::move(acc).finish();
  if (jacobian_to_wedge_sign(n, r, k) < 0) wedge = -wedge;
  return scalar_phi(n, k, N2, std::move(wedge));
}

PhiSpec build_phi_jacobian(const GammaSpec& g) {
  g.validate();
  const std::size_t n = g.n, k = g.k(), N1 = g.N1, N2 = g.N2;
  const std::size_t nv = k * n + N2;
  const std::size_t size = N2 + n * k;  // equals N1 * k
  auto cols = jacobian_columns(g);
  // Rows: block j holds gamma(t_j, x). Columns: x_1..x_N2, then t_1, ..., t_k.
  PolyMatrix m(size, std::vector<Polynomial>(size, Polynomial(nv)));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t row = 0; row < N1; ++row) {
      for (std::size_t c = 0; c < N2; ++c) m[j * N1 + row][c] = at_block(cols[n + c][row], n, N2, k, j);
      for (std::size_t c = 0; c < n; ++c) m[j * N1 + row][N2 + j * n + c] = at_block(cols[c][row], n, N2, k, j);
    }
  // The block-sparse layout suits memoised Laplace expansion at every size;
  // Bareiss would fill in the zero blocks.
  return scalar_phi(n, k, N2, det_cofactor(m));
}

PhiSpec build_phi_graph(const PolyVector& gamma0, std::size_t n, std::size_t r, std::size_t k) {
  require(n >= 1 && r >= 1 && k >= 1, "build_phi_graph: n, r, k must be positive");
  require(gamma0.size() == r, "build_phi_graph: gamma0 must have r components");
  const std::size_t N2 = r * k;
  require(gamma0.nvars() == n + N2, "build_phi_graph: gamma0 must have n + r*k variables");
  // Row block j holds d gamma0 / dx evaluated at (t_j, x).
  PolyMatrix m(N2, std::vector<Polynomial>(N2));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t row = 0; row < r; ++row)
      for (std::size_t c = 0; c < N2; ++c) m[j * r + row][c] = at_block(partial(gamma0[row], n + c), n, N2, k, j);
  Polynomial d = det_cofactor(m);
  // Moving the gamma0 rows of every block ahead of the identity rows of the
  // lifted Jacobian costs (-1)^{n r k(k+1)/2}.
  if ((n * r * (k * (k + 1) / 2)) % 2) d = -d;
  return scalar_phi(n, k, N2, std::move(d));
}

GammaSpec lift_graph(const PolyVector& gamma0, std::size_t n, std::size_t r, std::size_t k) {
  require(gamma0.size() == r && gamma0.nvars() == n + r * k, "lift_graph: shape mismatch");
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(Polynomial::variable(n + r * k, i));
  for (std::size_t i = 0; i < r; ++i) comps.push_back(gamma0[i]);
  GammaSpec g{n, n + r, r * k, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

unsigned long bezout_bound(const GammaSpec& g) {
  unsigned long prod = 1;
  for (const auto& c : g.components.components()) prod *= std::max(1u, c.degree().value_or(1));
  return prod;
}

std::string to_string(BoundCheck b) {
  switch (b) {
    case BoundCheck::holds: return "holds";
    case BoundCheck::fails: return "fails";
    case BoundCheck::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

BoundCheck vanishing_order_bound_check(const GammaSpec& g, std::span<const Rational> sample_x) {
  g.validate();
  require(sample_x.size() == g.N2, "vanishing_order_bound_check: sample point must have N2 coordinates");
  std::vector<std::size_t> xvars(g.N2);
  std::iota(xvars.begin(), xvars.end(), g.n);
  RForm omega = build_omega(g);
  bool nonzero = std::any_of(omega.coefficients.begin(), omega.coefficients.end(),
                             [&](const auto& kv) { return !specialize(kv.second, xvars, sample_x).is_zero(); });
  if (!nonzero) return BoundCheck::inconclusive;
  PhiSpec phi = build_phi_jacobian(g);
  PhiSpec frozen = freeze_params(phi, sample_x);
  auto expansion = order_of_vanishing(frozen);
  const unsigned bound = static_cast<unsigned>(g.r() * (g.k() - 1));
  if (expansion.identically_zero()) return BoundCheck::holds;
  return *expansion.q >= bound ? BoundCheck::holds : BoundCheck::fails;
}

}  // namespace nonconc
