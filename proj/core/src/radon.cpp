#include "nonconc/radon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nonconc/diagonal.hpp"
#include "nonconc/error.hpp"
#include "nonconc/hausdorff.hpp"
#include "nonconc/parallel.hpp"

namespace nonconc {

namespace {

std::vector<Rational> to_rationals(std::span<const double> v) {
  std::vector<Rational> out;
  out.reserve(v.size());
  for (double d : v) out.push_back(rational_from_double(d));
  return out;
}

bool ignores_params(const PhiSpec& phi) {
  for (const auto& c : phi.body.components())
    for (std::size_t i = 0; i < phi.params; ++i)
      if (c.degree_in(phi.param_var(i)) > 0) return false;
  return true;
}

// Midpoint of cell `idx` (mixed radix, `per_axis` cells per axis) of a box.
void midpoint(const Box& b, std::size_t per_axis, std::size_t idx, std::span<double> out) {
  for (std::size_t a = 0; a < b.dim(); ++a) {
    std::size_t i = idx % per_axis;
    idx /= per_axis;
    double h = (b.hi[a] - b.lo[a]) / static_cast<double>(per_axis);
    out[a] = b.lo[a] + (static_cast<double>(i) + 0.5) * h;
  }
}

std::size_t grid_size(std::size_t per_axis, std::size_t dim) {
  std::size_t n = 1;
  for (std::size_t a = 0; a < dim; ++a) n *= per_axis;
  return n;
}

void check_case(const RadonCase& rc) {
  rc.gamma.validate();
  require(rc.t_window.dim() == rc.gamma.n, "t_window must have dimension n");
  require(rc.x_window.dim() == rc.gamma.N2, "x_window must have dimension N2");
  require(rc.s > 0 && rc.delta > 0, "s and delta must be positive");
}

}  // namespace

OmegaRule OmegaRule::full() { return OmegaRule{}; }

OmegaRule OmegaRule::from_set(SetSpec set) {
  OmegaRule r;
  r.kind_ = Kind::set;
  r.set_ = std::move(set);
  return r;
}

OmegaRule OmegaRule::density_threshold(const GammaSpec& gamma, unsigned q, double level, DensityOptions opts) {
  require(q >= 1, "threshold rule needs q >= 1");
  OmegaRule r;
  r.kind_ = Kind::density_threshold;
  r.phi_ = build_phi_jacobian(gamma);
  r.q_ = q;
  r.level_ = level;
  opts.run_positivity = false;
  opts.threads = 1;  // callers already parallelise over x
  r.opts_ = opts;
  r.invariant_in_t_ = is_translation_invariant(r.phi_);
  r.ignores_x_ = r.invariant_in_t_ && ignores_params(r.phi_);
  r.cache_ = std::make_shared<Cache>();
  return r;
}

double OmegaRule::density_at(std::span<const double> t, std::span<const double> x) const {
  require(kind_ == Kind::density_threshold, "density_at needs a threshold rule");
  std::vector<double> key;
  if (!ignores_x_) key.assign(x.begin(), x.end());
  if (!invariant_in_t_) key.insert(key.end(), t.begin(), t.end());
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->values.find(key);
    if (it != cache_->values.end()) return it->second;
  }
  PhiSpec frozen = freeze_params(phi_, to_rationals(x));
  std::vector<Rational> at = invariant_in_t_ ? std::vector<Rational>(phi_.n) : to_rationals(t);
  double value = 0;
  auto order = local_order(frozen, at);
  if (order && *order < q_)
    value = std::numeric_limits<double>::infinity();
  else if (order && *order == q_)
    value = density_infimum(frozen, q_, at, opts_).upper;
  std::lock_guard lock(cache_->mutex);
  cache_->values.emplace(std::move(key), value);
  return value;
}

std::size_t OmegaRule::cached_evaluations() const {
  if (!cache_) return 0;
  std::lock_guard lock(cache_->mutex);
  return cache_->values.size();
}

bool OmegaRule::contains(std::span<const double> t, std::span<const double> x) const {
  switch (kind_) {
    case Kind::full:
      return true;
    case Kind::set: {
      std::vector<double> tx(t.begin(), t.end());
      tx.insert(tx.end(), x.begin(), x.end());
      return set_->contains(tx);
    }
    case Kind::density_threshold:
      return density_at(t, x) >= level_;
  }
  return false;
}

OmegaRule build_omega_tilde(const GammaSpec& gamma, unsigned q, double c, double delta, DensityOptions opts) {
  require(c > 0 && delta > 0, "c and delta must be positive");
  double level = c * std::pow(delta, static_cast<double>(gamma.n) / q);
  return OmegaRule::density_threshold(gamma, q, level, std::move(opts));
}

namespace {

// Evaluates gamma(., x) over the t grid, bailing out per component as soon
// as a coordinate leaves the bounding box of F.
double operator_value(const RadonCase& rc, const CompiledMap& gamma, const SetSpec& F, const Box& fbox,
                      std::span<const double> x, std::size_t quad_n) {
  const std::size_t n = rc.gamma.n, N1 = rc.gamma.N1;
  std::vector<double> pt(n + x.size()), y(N1);
  std::copy(x.begin(), x.end(), pt.begin() + n);
  const std::size_t cells = grid_size(quad_n, n);
  std::size_t hits = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    midpoint(rc.t_window, quad_n, c, std::span(pt).first(n));
    bool inside = true;
    for (std::size_t i = 0; i < N1 && inside; ++i) {
      y[i] = gamma[i](pt);
      inside = y[i] >= fbox.lo[i] && y[i] <= fbox.hi[i];
    }
    if (!inside || !F.contains(y)) continue;
    if (!rc.omega.contains(std::span<const double>(pt).first(n), x)) continue;
    ++hits;
  }
  return static_cast<double>(hits) * rc.t_window.volume() / static_cast<double>(cells);
}

}  // namespace

double apply_operator(const RadonCase& rc, const SetSpec& F, std::span<const double> x, std::size_t quad_n) {
  check_case(rc);
  require(F.dim() == rc.gamma.N1, "F must live in R^N1");
  require(x.size() == rc.gamma.N2, "x must have N2 coordinates");
  require(quad_n >= 1, "quad_n must be positive");
  CompiledMap gamma(rc.gamma.components);
  return operator_value(rc, gamma, F, F.bounding_box(), x, quad_n);
}

double operator_norm(const RadonCase& rc, const SetSpec& F, double p, std::size_t x_grid, std::size_t quad_n,
                     unsigned threads) {
  check_case(rc);
  require(F.dim() == rc.gamma.N1, "F must live in R^N1");
  require(p >= 1, "p must be at least 1");
  require(x_grid >= 1 && quad_n >= 1, "grid sizes must be positive");
  CompiledMap gamma(rc.gamma.components);
  const Box fbox = F.bounding_box();
  const std::size_t N2 = rc.gamma.N2, cells = grid_size(x_grid, N2);
  std::vector<double> powers(cells);
  parallel_for(cells, threads, [&](std::size_t c) {
    std::vector<double> x(N2);
    midpoint(rc.x_window, x_grid, c, x);
    double v = operator_value(rc, gamma, F, fbox, x, quad_n);
    powers[c] = v > 0 ? std::pow(v, p) : 0.0;
  });
  double sum = 0;
  for (double v : powers) sum += v;
  return std::pow(sum * rc.x_window.volume() / static_cast<double>(cells), 1.0 / p);
}

LpReport lp_ratio_check(const RadonCase& rc, const std::vector<SetSpec>& family, const LpOptions& opts) {
  check_case(rc);
  require(!family.empty(), "lp_ratio_check needs at least one set");
  const double k = static_cast<double>(rc.gamma.k());
  LpReport rep;
  rep.p = opts.p > 0 ? opts.p : k + rc.s;
  const double scale = std::pow(rc.delta, 1.0 / (k + rc.s));
  const double exponent = k / (k + rc.s);
  bool first = true;
  for (std::size_t i = 0; i < family.size(); ++i) {
    LpRow row;
    row.measure = family[i].volume();
    row.norm = operator_norm(rc, family[i], rep.p, opts.x_grid, opts.quad_n, opts.threads);
    row.refined_norm = row.norm;
    if (opts.doubling) {
      row.refined_norm = operator_norm(rc, family[i], rep.p, 2 * opts.x_grid, 2 * opts.quad_n, opts.threads);
      double base = std::max(row.norm, row.refined_norm);
      row.resolution_warning = base > 0 && std::abs(row.refined_norm - row.norm) > opts.doubling_tolerance * base;
    }
    if (row.measure > 0) {
      // The refined value is the better estimate whenever it was computed.
      row.rho = row.refined_norm * scale / std::pow(row.measure, exponent);
      if (first || *row.rho > rep.max_rho) {
        rep.max_rho = *row.rho;
        rep.argmax = i;
      }
      if (first || *row.rho < rep.min_rho) rep.min_rho = *row.rho;
      first = false;
    }
    if (row.resolution_warning) ++rep.warnings;
    rep.rows.push_back(std::move(row));
  }
  rep.pass = rep.max_rho <= rc.cap;
  return rep;
}

HypothesisReport hypothesis_spot_check(const RadonCase& rc, const HypothesisOptions& opts) {
  check_case(rc);
  require(opts.max_pieces >= 1, "E needs at least one piece");
  const std::size_t n = rc.gamma.n, k = rc.gamma.k();
  PhiSpec phi = build_phi_jacobian(rc.gamma);
  HypothesisReport rep;
  rep.seed = opts.seed;
  Rng rng = make_rng(opts.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_in = [&](const Box& b) {
    std::vector<double> v(b.dim());
    for (std::size_t a = 0; a < b.dim(); ++a) v[a] = b.lo[a] + unit(rng) * (b.hi[a] - b.lo[a]);
    return v;
  };
  for (std::size_t s = 0; s < opts.samples; ++s) {
    HypothesisSample hs;
    hs.x = uniform_in(rc.x_window);
    // Pieces are redrawn until sampled points of every piece lie in the slice.
    std::optional<SetSpec> E;
    for (int attempt = 0; attempt < 50 && !E; ++attempt) {
      std::size_t pieces = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(opts.max_pieces));
      pieces = std::min(pieces, opts.max_pieces);
      std::vector<SetSpec> parts;
      bool ok = true;
      for (std::size_t j = 0; j < pieces && ok; ++j) {
        auto a = uniform_in(rc.t_window), b = uniform_in(rc.t_window);
        std::vector<double> lo(n), hi(n);
        for (std::size_t d = 0; d < n; ++d) {
          lo[d] = std::min(a[d], b[d]);
          hi[d] = std::max(a[d], b[d]);
        }
        Box piece{lo, hi};
        if (rc.omega.kind() != OmegaRule::Kind::full)
          for (int probe = 0; probe < 16 && ok; ++probe) ok = rc.omega.contains(uniform_in(piece), hs.x);
        parts.push_back(SetSpec::box(lo, hi));
      }
      if (ok) E = parts.size() == 1 ? parts.front() : SetSpec::set_union(std::move(parts));
    }
    if (!E) continue;  // empty or tiny slice at this x
    hs.measure = E->volume();
    PhiSpec frozen = freeze_params(phi, to_rationals(hs.x));
    IntOptions io = opts.integral;
    io.seed = derive_seed(opts.seed, 1000 + s);
    auto r = int_functional(frozen, MeasureSpec::lebesgue(), *E, io);
    hs.integral = r.value;
    hs.std_error = r.std_error;
    hs.required = rc.delta * std::pow(hs.measure, static_cast<double>(k) + rc.s);
    hs.holds = hs.integral >= hs.required - 3 * hs.std_error;
    if (!hs.holds) ++rep.failures;
    rep.samples.push_back(std::move(hs));
  }
  rep.pass = rep.failures == 0 && !rep.samples.empty();
  return rep;
}

std::vector<SetSpec> random_box_unions(std::size_t count, std::size_t max_pieces, const Box& bounds,
                                       std::uint64_t seed, double min_side, double max_side) {
  require(max_pieces >= 1, "need at least one piece");
  require(0 < min_side && min_side <= max_side && max_side <= 1, "side fractions must satisfy 0 < min <= max <= 1");
  const std::size_t d = bounds.dim();
  std::vector<SetSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t pieces = std::min(max_pieces, 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(max_pieces)));
    std::vector<SetSpec> parts;
    for (std::size_t j = 0; j < pieces; ++j) {
      std::vector<double> lo(d), hi(d);
      for (std::size_t a = 0; a < d; ++a) {
        double width = bounds.hi[a] - bounds.lo[a];
        double side = (min_side + (max_side - min_side) * u(rng)) * width;
        lo[a] = bounds.lo[a] + u(rng) * (width - side);
        hi[a] = lo[a] + side;
      }
      parts.push_back(SetSpec::box(lo, hi));
    }
    out.push_back(parts.size() == 1 ? parts.front() : SetSpec::set_union(std::move(parts)));
  }
  return out;
}

}  // namespace nonconc
