#include "nonconc/diagonal.hpp"

#include <algorithm>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

// Enumerates beta <= e on the k*n block variables with |beta| = d and adds
// c * prod binom(e, beta) * y^(e - beta) u^beta * params to acc.
void expand_term(const PhiSpec& phi, const Monomial& e, const Rational& c, unsigned d, PolyAccumulator& acc) {
  const std::size_t kn = phi.k * phi.n;
  const std::size_t y0 = 0, u0 = phi.n, p0 = phi.n + kn;
  Monomial base;
  for (std::size_t i = 0; i < phi.params; ++i) base.set(p0 + i, e[kn + i]);
  std::vector<unsigned> beta(kn, 0);
  unsigned avail = 0;
  for (std::size_t v = 0; v < kn; ++v) avail += e[v];
  if (avail < d) return;

  auto recurse = [&](auto&& self, std::size_t v, unsigned left, unsigned remaining_avail, Rational coef) -> void {
    if (v == kn) {
      if (left != 0) return;
      Monomial m = base;
      for (std::size_t w = 0; w < kn; ++w) {
        const std::size_t coord = w % phi.n;
        const unsigned ev = e[w];
        if (ev - beta[w]) m.set(y0 + coord, m[y0 + coord] + ev - beta[w]);
        if (beta[w]) m.set(u0 + w, beta[w]);
      }
      acc.add(m, coef);
      return;
    }
    const unsigned ev = e[v];
    const unsigned rest = remaining_avail - ev;
    // Need left - b <= rest so the remaining variables can still reach d.
    const unsigned lo = left > rest ? left - rest : 0;
    const unsigned hi = std::min(ev, left);
    for (unsigned b = lo; b <= hi; ++b) {
      mpz_class binom;
      mpz_bin_uiui(binom.get_mpz_t(), ev, b);
      beta[v] = b;
      self(self, v + 1, left - b, rest, Rational(coef * binom));
    }
    beta[v] = 0;
  };
  recurse(recurse, 0, d, avail, c);
}

unsigned max_block_degree(const PhiSpec& phi) {
  unsigned best = 0;
  const std::size_t kn = phi.k * phi.n;
  for (const auto& comp : phi.body.components())
    for (const auto& [m, c] : comp.terms()) {
      unsigned d = 0;
      for (std::size_t v = 0; v < kn; ++v) d += m[v];
      best = std::max(best, d);
    }
  return best;
}

std::vector<Rational> pad_params(const PhiSpec& phi, std::span<const Rational> params) {
  require(params.size() == phi.params || (params.empty() && phi.params == 0),
          "expected " + std::to_string(phi.params) + " parameter values");
  return std::vector<Rational>(params.begin(), params.end());
}

void cross_check(const PhiSpec& phi, const DiagonalExpansion& ex, const OrderOptions& opts) {
  const std::size_t kn = phi.k * phi.n;
  const unsigned q = *ex.q;
  std::vector<Multiindex> alphas;
  // Every alpha with |alpha| = q, if there are not too many.
  std::size_t count = 0;
  {
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), kn + q - 1, q);
    count = c.fits_ulong_p() ? c.get_ui() : static_cast<std::size_t>(-1);
  }
  if (count <= opts.cross_check_limit) {
    Multiindex a(kn, 0);
    auto gen = [&](auto&& self, std::size_t v, unsigned left) -> void {
      if (v + 1 == kn) {
        a[v] = left;
        alphas.push_back(a);
        a[v] = 0;
        return;
      }
      for (unsigned b = 0; b <= left; ++b) {
        a[v] = b;
        self(self, v + 1, left - b);
      }
      a[v] = 0;
    };
    gen(gen, 0, q);
  } else {
    for (const auto& [a, c] : ex.leading) alphas.push_back(a);
  }
  for (const auto& a : alphas) {
    std::vector<unsigned> full(a);
    full.resize(phi.nvars(), 0);
    Rational inv_fact = 1 / multiindex_factorial(a);
    auto it = ex.leading.find(a);
    for (std::size_t comp = 0; comp < phi.m(); ++comp) {
      Polynomial direct = restrict_to_diagonal(phi, partial(phi.body[comp], full)) * inv_fact;
      bool ok = it == ex.leading.end() ? direct.is_zero() : direct == it->second[comp];
      if (!ok) throw DomainError("order_of_vanishing: expansion and direct differentiation disagree");
    }
  }
}

}  // namespace

std::vector<std::vector<unsigned>> split_multiindex(const Multiindex& alpha, std::size_t n, std::size_t k) {
  require(alpha.size() == n * k, "multiindex must have k*n entries");
  std::vector<std::vector<unsigned>> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j].assign(alpha.begin() + j * n, alpha.begin() + (j + 1) * n);
  return out;
}

PolyVector diagonal_h_coefficient(const PhiSpec& phi, unsigned d) {
  phi.validate();
  const std::size_t out_n = phi.n + phi.k * phi.n + phi.params;
  std::vector<Polynomial> comps;
  for (const auto& comp : phi.body.components()) {
    PolyAccumulator acc(out_n);
    for (const auto& [m, c] : comp.terms()) expand_term(phi, m, c, d, acc);
    comps.push_back(std::move(acc).finish());
  }
  return PolyVector(std::move(comps));
}

Polynomial restrict_to_diagonal(const PhiSpec& phi, const Polynomial& p) {
  require(p.nvars() == phi.nvars(), "restrict_to_diagonal: variable count mismatch");
  std::vector<std::size_t> map(phi.nvars());
  for (std::size_t v = 0; v < phi.k * phi.n; ++v) map[v] = v % phi.n;
  for (std::size_t i = 0; i < phi.params; ++i) map[phi.k * phi.n + i] = phi.n + i;
  return embed(p, phi.n + phi.params, map);
}

DiagonalExpansion order_of_vanishing(const PhiSpec& phi, const OrderOptions& opts) {
  phi.validate();
  DiagonalExpansion ex;
  ex.n = phi.n;
  ex.k = phi.k;
  ex.params = phi.params;
  const std::size_t kn = phi.k * phi.n;
  const unsigned max_d = max_block_degree(phi);
  for (unsigned d = 0; d <= max_d; ++d) {
    PolyVector coeff = diagonal_h_coefficient(phi, d);
    if (coeff.is_zero()) continue;
    ex.q = d;
    if (d == 0) return ex;  // Phi does not vanish on the diagonal
    // Group by the u-exponents: the u^alpha coefficient is
    // d^alpha Phi(y, ..., y) / alpha!.
    std::map<Multiindex, std::vector<std::vector<Polynomial::Term>>> groups;
    const std::size_t out_n = phi.n + phi.params;
    for (std::size_t comp = 0; comp < phi.m(); ++comp) {
      for (const auto& [m, c] : coeff[comp].terms()) {
        Multiindex a(kn);
        for (std::size_t v = 0; v < kn; ++v) a[v] = m[phi.n + v];
        Monomial rest;
        for (std::size_t i = 0; i < phi.n; ++i) rest.set(i, m[i]);
        for (std::size_t i = 0; i < phi.params; ++i) rest.set(phi.n + i, m[phi.n + kn + i]);
        auto& slot = groups[a];
        slot.resize(phi.m());
        slot[comp].emplace_back(rest, c);
      }
    }
    for (auto& [a, per_comp] : groups) {
      std::vector<Polynomial> comps;
      for (auto& terms : per_comp) comps.push_back(Polynomial::from_terms(out_n, std::move(terms)));
      ex.leading.emplace(a, PolyVector(std::move(comps)));
    }
    if (opts.cross_check) cross_check(phi, ex, opts);
    return ex;
  }
  return ex;  // identically zero
}

PhiSpec freeze_params(const PhiSpec& phi, std::span<const Rational> params) {
  phi.validate();
  auto values = pad_params(phi, params);
  if (phi.params == 0) return phi;
  std::vector<std::size_t> vars(phi.params);
  for (std::size_t i = 0; i < phi.params; ++i) vars[i] = phi.param_var(i);
  std::vector<Polynomial> comps;
  for (const auto& c : phi.body.components()) comps.push_back(specialize(c, vars, values));
  PhiSpec out;
  out.n = phi.n;
  out.k = phi.k;
  out.params = 0;
  out.body = PolyVector(std::move(comps));
  return out;
}

DiagonalExpansion order_of_vanishing_at(const PhiSpec& phi, std::span<const Rational> params, const OrderOptions& opts) {
  return order_of_vanishing(freeze_params(phi, params), opts);
}

PolyVector taylor_at_diagonal(const PhiSpec& phi, std::span<const Rational> x, std::span<const Rational> params) {
  require(x.size() == phi.n, "diagonal point must have n coordinates");
  PhiSpec frozen = freeze_params(phi, params);
  std::vector<Rational> shift(frozen.nvars());
  for (std::size_t v = 0; v < shift.size(); ++v) shift[v] = x[v % phi.n];
  std::vector<Polynomial> comps;
  for (const auto& c : frozen.body.components()) comps.push_back(translate(c, shift));
  return PolyVector(std::move(comps));
}

std::optional<unsigned> local_order(const PhiSpec& phi, std::span<const Rational> x, std::span<const Rational> params) {
  PolyVector local = taylor_at_diagonal(phi, x, params);
  std::optional<unsigned> q;
  for (const auto& c : local.components())
    for (const auto& [m, coef] : c.terms())
      if (!q || m.degree() < *q) q = m.degree();
  return q;
}

std::vector<Rational> diagonal_derivative_exact(const PhiSpec& phi, const RationalMatrix& T, const Multiindex& alpha,
                                                std::span<const Rational> x, std::span<const Rational> params) {
  require(T.size() == phi.n, "diagonal_derivative: T must be n x n");
  require(alpha.size() == phi.k * phi.n, "diagonal_derivative: alpha must have k*n entries");
  PolyVector local = taylor_at_diagonal(phi, x, params);
  std::vector<Rational> out;
  std::vector<Rational> origin(phi.k * phi.n, Rational(0));
  for (const auto& c : local.components()) {
    Polynomial p = c;
    for (std::size_t j = 0; j < phi.k; ++j) p = compose_linear(p, T, j * phi.n);
    out.push_back(eval(partial(p, alpha), origin));
  }
  return out;
}

std::vector<double> diagonal_derivative(const PhiSpec& phi, const RationalMatrix& T, const Multiindex& alpha,
                                        std::span<const Rational> x, std::span<const Rational> params) {
  auto exact = diagonal_derivative_exact(phi, T, alpha, x, params);
  std::vector<double> out;
  out.reserve(exact.size());
  for (const auto& v : exact) out.push_back(to_double(v));
  return out;
}

}  // namespace nonconc
