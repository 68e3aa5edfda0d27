#include "nonconc/hausdorff.hpp"

#include <cmath>
#include <limits>

#include "nonconc/error.hpp"
#include "nonconc/parallel.hpp"

namespace nonconc {

bool is_translation_invariant(const PhiSpec& phi) {
  phi.validate();
  const std::size_t kn = phi.k * phi.n, total = phi.nvars() + phi.n;
  std::vector<Polynomial> subs;
  for (std::size_t v = 0; v < phi.nvars(); ++v) {
    Polynomial s = Polynomial::variable(total, v);
    if (v < kn) s = s + Polynomial::variable(total, phi.nvars() + v % phi.n);
    subs.push_back(s);
  }
  std::vector<std::size_t> ident(phi.nvars());
  for (std::size_t v = 0; v < ident.size(); ++v) ident[v] = v;
  for (const auto& c : phi.body.components())
    if (compose(c, subs) != embed(c, total, ident)) return false;
  return true;
}

CoverEstimate cover_upper(const PhiSpec& phi, double sigma, const Box& E, unsigned grid_level,
                          const CoverOptions& opts) {
  return cover_upper(phi, sigma, E, std::vector<unsigned>(E.dim(), grid_level), opts);
}

CoverEstimate cover_upper(const PhiSpec& phi, double sigma, const Box& E, const std::vector<unsigned>& levels,
                          const CoverOptions& opts) {
  require(sigma > 0, "cover exponent sigma must be positive");
  require(E.dim() == phi.n, "cover box must have dimension n");
  require(levels.size() == E.dim(), "one level per axis");
  SetSpec::box(E.lo, E.hi);  // validates
  std::size_t cells = 1;
  std::vector<std::size_t> per_axis;
  for (unsigned l : levels) {
    require(l <= 12, "grid level must be <= 12");
    per_axis.push_back(std::size_t{1} << l);
    cells *= per_axis.back();
    require(cells <= opts.max_cells, "cover has too many cells");
  }
  CoverEstimate est;
  est.sigma = sigma;
  est.levels = levels;
  est.cells = cells;
  est.seed = opts.sup.seed;
  std::vector<double> width(E.dim());
  double diam2 = 0;
  for (std::size_t i = 0; i < E.dim(); ++i) {
    width[i] = (E.hi[i] - E.lo[i]) / static_cast<double>(per_axis[i]);
    diam2 += width[i] * width[i];
  }
  est.delta = std::sqrt(diam2);

  auto cell_box = [&](std::size_t c) {
    Box b{E.lo, E.lo};
    std::size_t rest = c;
    for (std::size_t i = 0; i < E.dim(); ++i) {
      std::size_t j = rest % per_axis[i];
      rest /= per_axis[i];
      b.lo[i] = E.lo[i] + width[i] * static_cast<double>(j);
      b.hi[i] = j + 1 == per_axis[i] ? E.hi[i] : b.lo[i] + width[i];
    }
    return b;
  };
  auto cell_sup = [&](std::size_t c) {
    Box b = cell_box(c);
    SupOptions so = opts.sup;
    so.seed = derive_seed(opts.sup.seed, c);
    so.threads = 1;
    return sup_functional(phi, SetSpec::box(b.lo, b.hi), so).value;
  };

  if (is_translation_invariant(phi)) {
    est.translation_shortcut = true;
    est.value = static_cast<double>(cells) * std::pow(cell_sup(0), sigma);
    return est;
  }
  std::vector<double> vals(cells);
  parallel_for(cells, opts.threads, [&](std::size_t c) { vals[c] = std::pow(cell_sup(c), sigma); });
  for (double v : vals) est.value += v;  // fixed order for reproducible sums
  return est;
}

ComparabilityReport density_comparability_check(const PhiSpec& phi, unsigned q, const Box& E, unsigned grid_level,
                                                const DensityOptions& dens, const CoverOptions& cover) {
  require(q > 0, "q must be positive");
  ComparabilityReport rep;
  rep.q = q;
  rep.level = grid_level;
  rep.sigma = static_cast<double>(phi.n) / q;
  rep.isotropic = cover_upper(phi, rep.sigma, E, grid_level, cover);
  rep.best = rep.isotropic;

  // Every per-axis level vector is an admissible cover; keep the least.
  if (rep.isotropic.translation_shortcut) {
    std::vector<unsigned> lv(E.dim(), 0);
    while (true) {
      auto est = cover_upper(phi, rep.sigma, E, lv, cover);
      if (est.value < rep.best.value) rep.best = est;
      std::size_t i = 0;
      while (i < lv.size() && ++lv[i] > grid_level) lv[i++] = 0;
      if (i == lv.size()) break;
    }
  }

  // Riemann sum of the density on the isotropic grid.
  const std::size_t per_axis = std::size_t{1} << grid_level;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < E.dim(); ++i) cells *= per_axis;
  const double cell_vol = E.volume() / static_cast<double>(cells);
  auto center = [&](std::size_t c) {
    std::vector<Rational> x;
    std::size_t rest = c;
    for (std::size_t i = 0; i < E.dim(); ++i) {
      std::size_t j = rest % per_axis;
      rest /= per_axis;
      double w = (E.hi[i] - E.lo[i]) / static_cast<double>(per_axis);
      x.push_back(rational_from_double(E.lo[i] + w * (static_cast<double>(j) + 0.5)));
    }
    return x;
  };
  DensityOptions d = dens;
  d.run_positivity = false;
  if (rep.isotropic.translation_shortcut) {
    rep.density_constant = true;
    rep.riemann = density_infimum(phi, q, center(0), d).upper * E.volume();
  } else {
    std::vector<double> vals(cells);
    d.threads = 1;
    parallel_for(cells, cover.threads, [&](std::size_t c) { vals[c] = density_infimum(phi, q, center(c), d).upper; });
    for (double v : vals) rep.riemann += v * cell_vol;
  }
  // Optimiser floor: values this small are the zero density.
  rep.density_zero = rep.riemann <= 1e-9 * E.volume();
  if (!rep.density_zero) rep.ratio = rep.best.value / rep.riemann;
  return rep;
}

}  // namespace nonconc
