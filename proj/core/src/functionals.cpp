#include "nonconc/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nonconc/error.hpp"
#include "nonconc/optimize.hpp"
#include "nonconc/parallel.hpp"

namespace nonconc {

namespace {

constexpr std::size_t kShard = 4096;

std::vector<std::vector<double>> box_corners(const Box& b) {
  const std::size_t d = b.dim();
  require(d <= 16, "too many dimensions to enumerate box corners");
  // Collapse degenerate axes so points do not repeat corners.
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < d; ++i)
    if (b.hi[i] > b.lo[i]) free_axes.push_back(i);
  std::vector<std::vector<double>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << free_axes.size()); ++mask) {
    std::vector<double> c = b.lo;
    for (std::size_t j = 0; j < free_axes.size(); ++j)
      if (mask >> j & 1) c[free_axes[j]] = b.hi[free_axes[j]];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> apply_affine(const Eigen::MatrixXd& A, std::span<const double> off, std::span<const double> y) {
  std::vector<double> x(off.begin(), off.end());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) x[static_cast<std::size_t>(i)] += A(i, j) * y[static_cast<std::size_t>(j)];
  return x;
}

// Exact area/volume of a union of boxes by coordinate compression.
double union_of_boxes_volume(const std::vector<Box>& boxes) {
  const std::size_t d = boxes.front().dim();
  std::vector<std::vector<double>> cuts(d);
  for (const auto& b : boxes)
    for (std::size_t i = 0; i < d; ++i) {
      cuts[i].push_back(b.lo[i]);
      cuts[i].push_back(b.hi[i]);
    }
  std::size_t cells = 1;
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) return 0.0;
    cells *= c.size() - 1;
    require(cells <= 50'000'000, "union of boxes too fragmented for exact volume");
  }
  double total = 0;
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> mid(d);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rest = cell;
    double vol = 1;
    for (std::size_t i = 0; i < d; ++i) {
      std::size_t j = rest % (cuts[i].size() - 1);
      rest /= cuts[i].size() - 1;
      mid[i] = 0.5 * (cuts[i][j] + cuts[i][j + 1]);
      vol *= cuts[i][j + 1] - cuts[i][j];
    }
    for (const auto& b : boxes)
      if (b.contains(mid)) {
        total += vol;
        break;
      }
  }
  return total;
}

std::vector<double> uniform_in(const Box& b, Rng& rng) {
  std::vector<double> x(b.dim());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < b.dim(); ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * u(rng);
  return x;
}

void require_frozen(const PhiSpec& phi) {
  phi.validate();
  if (phi.params != 0)
    throw ValidationError("functionals need Phi with all parameters frozen (" + std::to_string(phi.params) + " free)");
}

struct Evaluator {
  CompiledMap map;
  NormKind norm;
  mutable std::vector<double> buf;

  Evaluator(const PhiSpec& phi, NormKind nk) : map(phi.body), norm(nk), buf(phi.m()) {}
  double operator()(std::span<const double> tuple) const {
    map.eval(tuple, buf);
    return vector_norm(buf, norm);
  }
};

}  // namespace

double Box::volume() const {
  double v = 1;
  for (std::size_t i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

SetSpec SetSpec::box(std::vector<double> lo, std::vector<double> hi) {
  require(!lo.empty() && lo.size() == hi.size(), "box needs lo and hi of equal nonzero length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]), "box bounds must be finite");
    require(lo[i] <= hi[i], "box needs lo <= hi in every coordinate");
  }
  SetSpec s;
  s.kind_ = Kind::box;
  s.dim_ = lo.size();
  s.box_ = Box{std::move(lo), std::move(hi)};
  return s;
}

SetSpec SetSpec::point(std::vector<double> x) { return box(x, x); }

SetSpec SetSpec::affine(Eigen::MatrixXd A, std::vector<double> offset, Box base) {
  const std::size_t d = base.dim();
  require(d > 0 && static_cast<std::size_t>(A.rows()) == d && static_cast<std::size_t>(A.cols()) == d,
          "affine image needs a square matrix matching the base box");
  require(offset.size() == d, "affine offset has wrong length");
  SetSpec chk = box(base.lo, base.hi);
  double det = A.determinant();
  if (!(std::abs(det) > 0) || !std::isfinite(det)) throw ValidationError("affine matrix must be nonsingular");
  SetSpec s;
  s.kind_ = Kind::affine;
  s.dim_ = d;
  s.box_ = std::move(base);
  s.A_inv_ = A.inverse();
  s.A_ = std::move(A);
  s.offset_ = std::move(offset);
  (void)chk;
  return s;
}

SetSpec SetSpec::set_union(std::vector<SetSpec> parts) {
  require(!parts.empty(), "union needs at least one part");
  const std::size_t d = parts.front().dim();
  for (const auto& p : parts) require(p.dim() == d, "union parts must share a dimension");
  SetSpec s;
  s.kind_ = Kind::set_union;
  s.dim_ = d;
  for (std::size_t i = 0; i < parts.size(); ++i) s.part_volumes_.push_back(parts[i].volume(derive_seed(0, i), 20000));
  s.parts_ = std::move(parts);
  return s;
}

SetSpec SetSpec::predicate(std::vector<Polynomial> constraints, Box bbox) {
  SetSpec chk = box(bbox.lo, bbox.hi);
  (void)chk;
  for (const auto& c : constraints) require(c.nvars() == bbox.dim(), "predicate constraint has wrong variable count");
  SetSpec s;
  s.kind_ = Kind::predicate;
  s.dim_ = bbox.dim();
  s.box_ = std::move(bbox);
  for (const auto& c : constraints) s.compiled_.emplace_back(c);
  s.constraints_ = std::move(constraints);
  return s;
}

bool SetSpec::contains(std::span<const double> x) const {
  switch (kind_) {
    case Kind::box: return box_.contains(x);
    case Kind::affine: {
      std::vector<double> y(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < dim_; ++j)
          s += A_inv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (x[j] - offset_[j]);
        y[i] = s;
      }
      for (std::size_t i = 0; i < dim_; ++i) {
        double tol = 1e-12 * std::max(1.0, std::abs(box_.hi[i] - box_.lo[i]));
        if (y[i] < box_.lo[i] - tol || y[i] > box_.hi[i] + tol) return false;
      }
      return true;
    }
    case Kind::set_union:
      return std::any_of(parts_.begin(), parts_.end(), [&](const SetSpec& p) { return p.contains(x); });
    case Kind::predicate:
      if (!box_.contains(x)) return false;
      for (const auto& c : compiled_)
        if (c(x) < 0) return false;
      return true;
  }
  return false;
}

Box SetSpec::bounding_box() const {
  switch (kind_) {
    case Kind::box:
    case Kind::predicate: return box_;
    case Kind::affine: {
      Box b{std::vector<double>(dim_, std::numeric_limits<double>::infinity()),
            std::vector<double>(dim_, -std::numeric_limits<double>::infinity())};
      for (const auto& c : corners())
        for (std::size_t i = 0; i < dim_; ++i) {
          b.lo[i] = std::min(b.lo[i], c[i]);
          b.hi[i] = std::max(b.hi[i], c[i]);
        }
      return b;
    }
    case Kind::set_union: {
      Box b = parts_.front().bounding_box();
      for (const auto& p : parts_) {
        Box q = p.bounding_box();
        for (std::size_t i = 0; i < dim_; ++i) {
          b.lo[i] = std::min(b.lo[i], q.lo[i]);
          b.hi[i] = std::max(b.hi[i], q.hi[i]);
        }
      }
      return b;
    }
  }
  return box_;
}

bool SetSpec::volume_is_exact() const {
  switch (kind_) {
    case Kind::box:
    case Kind::affine: return true;
    case Kind::set_union:
      return std::all_of(parts_.begin(), parts_.end(), [](const SetSpec& p) { return p.kind() == Kind::box; });
    case Kind::predicate: return false;
  }
  return false;
}

double SetSpec::volume(std::uint64_t seed, std::size_t samples) const {
  switch (kind_) {
    case Kind::box: return box_.volume();
    case Kind::affine: return std::abs(A_.determinant()) * box_.volume();
    case Kind::set_union:
      if (volume_is_exact()) {
        std::vector<Box> boxes;
        for (const auto& p : parts_) boxes.push_back(p.base());
        return union_of_boxes_volume(boxes);
      }
      break;
    case Kind::predicate: break;
  }
  Box bb = bounding_box();
  double bv = bb.volume();
  if (bv == 0) return 0;
  Rng rng = make_rng(seed, 0x766f6c);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i)
    if (contains(uniform_in(bb, rng))) ++hits;
  return bv * static_cast<double>(hits) / static_cast<double>(samples);
}

std::vector<double> SetSpec::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::box: return uniform_in(box_, rng);
    case Kind::affine: return apply_affine(A_, offset_, uniform_in(box_, rng));
    case Kind::set_union: {
      double total = std::accumulate(part_volumes_.begin(), part_volumes_.end(), 0.0);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int attempt = 0; attempt < 100000; ++attempt) {
        std::size_t i = 0;
        if (total > 0) {
          double r = u(rng) * total;
          while (i + 1 < parts_.size() && r >= part_volumes_[i]) r -= part_volumes_[i++];
        } else {
          i = std::uniform_int_distribution<std::size_t>(0, parts_.size() - 1)(rng);
        }
        auto x = parts_[i].sample(rng);
        if (total == 0) return x;
        // Accept with probability 1/(number of covering parts) so overlaps
        // are not over-weighted.
        std::size_t cover = 0;
        for (const auto& p : parts_)
          if (p.contains(x)) ++cover;
        if (cover <= 1 || u(rng) * static_cast<double>(cover) < 1.0) return x;
      }
      throw DomainError("union sampler failed to accept a point");
    }
    case Kind::predicate:
      for (int attempt = 0; attempt < 100000; ++attempt) {
        auto x = uniform_in(box_, rng);
        if (contains(x)) return x;
      }
      throw DomainError("predicate set looks empty: no sample accepted in 100000 draws");
  }
  return {};
}

std::vector<std::vector<double>> SetSpec::corners() const {
  switch (kind_) {
    case Kind::box: return box_corners(box_);
    case Kind::affine: {
      std::vector<std::vector<double>> out;
      for (const auto& c : box_corners(box_)) out.push_back(apply_affine(A_, offset_, c));
      return out;
    }
    case Kind::set_union: {
      std::vector<std::vector<double>> out;
      for (const auto& p : parts_)
        for (auto& c : p.corners()) out.push_back(std::move(c));
      return out;
    }
    case Kind::predicate: {
      std::vector<std::vector<double>> out;
      for (auto& c : box_corners(box_))
        if (contains(c)) out.push_back(std::move(c));
      return out;
    }
  }
  return {};
}

std::optional<std::vector<double>> SetSpec::project(std::span<const double> x) const {
  switch (kind_) {
    case Kind::box: {
      std::vector<double> y(x.begin(), x.end());
      for (std::size_t i = 0; i < dim_; ++i) y[i] = std::clamp(y[i], box_.lo[i], box_.hi[i]);
      return y;
    }
    case Kind::affine: {
      std::vector<double> y(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < dim_; ++j)
          s += A_inv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (x[j] - offset_[j]);
        y[i] = std::clamp(s, box_.lo[i], box_.hi[i]);
      }
      return apply_affine(A_, offset_, y);
    }
    case Kind::set_union: {
      std::optional<std::vector<double>> best;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& p : parts_) {
        auto y = p.project(x);
        if (!y) continue;
        double d = 0;
        for (std::size_t i = 0; i < dim_; ++i) d += ((*y)[i] - x[i]) * ((*y)[i] - x[i]);
        if (d < best_d) {
          best_d = d;
          best = std::move(y);
        }
      }
      return best;
    }
    case Kind::predicate:
      if (contains(x)) return std::vector<double>(x.begin(), x.end());
      return std::nullopt;
  }
  return std::nullopt;
}

SetSpec SetSpec::mapped(const Eigen::MatrixXd& L, std::span<const double> b) const {
  require(static_cast<std::size_t>(L.rows()) == dim_ && static_cast<std::size_t>(L.cols()) == dim_ && b.size() == dim_,
          "mapped: L must be d x d and b of length d");
  std::vector<double> bv(b.begin(), b.end());
  switch (kind_) {
    case Kind::box: {
      std::vector<double> off = bv;
      return affine(L, off, box_);
    }
    case Kind::affine: {
      Eigen::VectorXd o(static_cast<Eigen::Index>(dim_));
      for (std::size_t i = 0; i < dim_; ++i) o(static_cast<Eigen::Index>(i)) = offset_[i];
      Eigen::VectorXd no = L * o;
      std::vector<double> off(dim_);
      for (std::size_t i = 0; i < dim_; ++i) off[i] = no(static_cast<Eigen::Index>(i)) + bv[i];
      return affine(L * A_, off, box_);
    }
    case Kind::set_union: {
      std::vector<SetSpec> ps;
      for (const auto& p : parts_) ps.push_back(p.mapped(L, b));
      return set_union(std::move(ps));
    }
    case Kind::predicate: {
      // Pull constraints back through y = L x + b: x = L^{-1}(y - b).
      Eigen::MatrixXd Li = L.inverse();
      RationalMatrix lin(dim_, std::vector<Rational>(dim_));
      std::vector<Polynomial> subs;
      for (std::size_t i = 0; i < dim_; ++i) {
        Polynomial s = Polynomial::constant(dim_, Rational(0));
        for (std::size_t j = 0; j < dim_; ++j) {
          Rational c = rational_from_double(Li(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
          s = s + Polynomial::variable(dim_, j) * c - Polynomial::constant(dim_, c * rational_from_double(bv[j]));
        }
        subs.push_back(s);
      }
      std::vector<Polynomial> cons;
      for (const auto& c : constraints_) cons.push_back(compose(c, subs));
      Box bb{std::vector<double>(dim_, std::numeric_limits<double>::infinity()),
             std::vector<double>(dim_, -std::numeric_limits<double>::infinity())};
      for (const auto& c : box_corners(box_)) {
        auto y = apply_affine(L, bv, c);
        for (std::size_t i = 0; i < dim_; ++i) {
          bb.lo[i] = std::min(bb.lo[i], y[i]);
          bb.hi[i] = std::max(bb.hi[i], y[i]);
        }
      }
      return predicate(std::move(cons), std::move(bb));
    }
  }
  return *this;
}

MeasureSpec MeasureSpec::lebesgue() { return MeasureSpec{}; }

MeasureSpec MeasureSpec::weighted(Polynomial density) {
  MeasureSpec m;
  m.kind_ = Kind::weighted;
  m.density_ = std::move(density);
  return m;
}

MeasureSpec MeasureSpec::discrete(std::vector<std::vector<double>> points, std::vector<double> weights) {
  require(!points.empty(), "discrete measure needs at least one atom");
  require(points.size() == weights.size(), "discrete measure needs one weight per atom");
  for (const auto& p : points) require(p.size() == points.front().size(), "atoms must share a dimension");
  for (double w : weights) require(std::isfinite(w) && w >= 0, "atom weights must be finite and nonnegative");
  MeasureSpec m;
  m.kind_ = Kind::discrete;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  return m;
}

MeasureSpec::Mass MeasureSpec::mass(const SetSpec& E, std::uint64_t seed, std::size_t samples) const {
  switch (kind_) {
    case Kind::lebesgue: {
      double v = E.volume(seed, samples);
      if (E.volume_is_exact()) return {v, 0.0};
      double bv = E.bounding_box().volume();
      double p = bv > 0 ? v / bv : 0;
      return {v, bv * std::sqrt(p * (1 - p) / static_cast<double>(samples))};
    }
    case Kind::weighted: {
      require(density_.nvars() == E.dim(), "density polynomial has wrong variable count");
      double vol = E.volume(seed, samples);
      if (vol == 0) return {0.0, 0.0};
      CompiledPoly w(density_);
      Rng rng = make_rng(seed, 0x6d617373);
      double sum = 0, sq = 0;
      for (std::size_t i = 0; i < samples; ++i) {
        double v = w(E.sample(rng));
        if (v < 0) throw DomainError("density polynomial is negative on the set");
        sum += v;
        sq += v * v;
      }
      double n = static_cast<double>(samples);
      double mean = sum / n, var = std::max(0.0, sq / n - mean * mean);
      return {vol * mean, vol * std::sqrt(var / n)};
    }
    case Kind::discrete: {
      double total = 0;
      for (std::size_t i = 0; i < points_.size(); ++i)
        if (E.contains(points_[i])) total += weights_[i];
      return {total, 0.0};
    }
  }
  return {};
}

SupReport sup_functional(const PhiSpec& phi, const SetSpec& E, const SupOptions& opts) {
  require_frozen(phi);
  require(E.dim() == phi.n, "set dimension must equal n");
  const std::size_t n = phi.n, k = phi.k, kn = n * k;

  struct Best {
    double value = -1;
    std::vector<double> tuple;
    std::size_t evaluated = 0;
  };

  // Random tuples, sharded by seed stream.
  const std::size_t shards = (opts.budget + kShard - 1) / kShard;
  std::vector<Best> shard_best(shards);
  parallel_for(shards, opts.threads, [&](std::size_t s) {
    Evaluator eval(phi, opts.norm);
    Rng rng = make_rng(opts.seed, s);
    std::size_t count = std::min(kShard, opts.budget - s * kShard);
    std::vector<double> tuple(kn);
    Best& b = shard_best[s];
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        auto x = E.sample(rng);
        std::copy(x.begin(), x.end(), tuple.begin() + static_cast<std::ptrdiff_t>(j * n));
      }
      double v = eval(tuple);
      if (v > b.value) {
        b.value = v;
        b.tuple = tuple;
      }
    }
    b.evaluated = count;
  });

  // Vertex tuples: exact maxima for Phi affine in each slot coordinate.
  Best corner_best;
  auto corners = E.corners();
  if (!corners.empty()) {
    Evaluator eval(phi, opts.norm);
    std::vector<double> tuple(kn);
    double total = std::pow(static_cast<double>(corners.size()), static_cast<double>(k));
    auto visit = [&](const std::vector<std::size_t>& pick) {
      for (std::size_t j = 0; j < k; ++j)
        std::copy(corners[pick[j]].begin(), corners[pick[j]].end(), tuple.begin() + static_cast<std::ptrdiff_t>(j * n));
      double v = eval(tuple);
      ++corner_best.evaluated;
      if (v > corner_best.value) {
        corner_best.value = v;
        corner_best.tuple = tuple;
      }
    };
    std::vector<std::size_t> pick(k, 0);
    if (total <= static_cast<double>(opts.corner_limit)) {
      while (true) {
        visit(pick);
        std::size_t j = 0;
        while (j < k && ++pick[j] == corners.size()) pick[j++] = 0;
        if (j == k) break;
      }
    } else {
      Rng rng = make_rng(opts.seed, 0x636f726e);
      std::uniform_int_distribution<std::size_t> any(0, corners.size() - 1);
      for (std::size_t i = 0; i < opts.corner_limit; ++i) {
        for (auto& p : pick) p = any(rng);
        visit(pick);
      }
    }
  }

  std::vector<Best> candidates = shard_best;
  if (corner_best.value >= 0) candidates.push_back(corner_best);
  std::stable_sort(candidates.begin(), candidates.end(), [](const Best& a, const Best& b) { return a.value > b.value; });

  SupReport rep;
  rep.seed = opts.seed;
  for (const auto& c : candidates) rep.evaluated += c.evaluated;
  Best best = candidates.empty() ? Best{} : candidates.front();

  // Nelder-Mead polish from the leading candidates, every iterate projected
  // back into E slot by slot.
  Box bb = E.bounding_box();
  Evaluator eval(phi, opts.norm);
  auto projected = [&](std::span<const double> z) -> std::optional<std::vector<double>> {
    std::vector<double> out(kn);
    for (std::size_t j = 0; j < k; ++j) {
      auto y = E.project(z.subspan(j * n, n));
      if (!y) return std::nullopt;
      std::copy(y->begin(), y->end(), out.begin() + static_cast<std::ptrdiff_t>(j * n));
    }
    return out;
  };
  std::vector<double> steps(kn);
  for (std::size_t v = 0; v < kn; ++v) steps[v] = std::max(1e-12, 0.1 * (bb.hi[v % n] - bb.lo[v % n]));
  std::size_t polish = std::min(opts.polish_starts, candidates.size());
  for (std::size_t c = 0; c < polish; ++c) {
    if (candidates[c].tuple.empty() || candidates[c].value <= 0) continue;
    std::size_t evals = 0;
    auto f = [&](std::span<const double> z) {
      ++evals;
      auto t = projected(z);
      return t ? -eval(*t) : 0.0;
    };
    NelderMeadOptions nm;
    nm.max_iterations = opts.polish_iterations;
    nm.f_tolerance = 1e-12;
    nm.steps = steps;
    auto r = nelder_mead(f, candidates[c].tuple, nm);
    rep.evaluated += evals;
    auto t = projected(r.x);
    if (t) {
      double v = eval(*t);
      if (v > best.value) {
        best.value = v;
        best.tuple = *t;
      }
    }
  }

  rep.value = std::max(0.0, best.value);
  for (std::size_t j = 0; j < k && !best.tuple.empty(); ++j)
    rep.argmax.emplace_back(best.tuple.begin() + static_cast<std::ptrdiff_t>(j * n),
                            best.tuple.begin() + static_cast<std::ptrdiff_t>((j + 1) * n));
  return rep;
}

IntReport int_functional(const PhiSpec& phi, const MeasureSpec& mu, const SetSpec& E, const IntOptions& opts) {
  require_frozen(phi);
  require(E.dim() == phi.n, "set dimension must equal n");
  require(opts.budget > 0, "integral budget must be positive");
  const std::size_t n = phi.n, k = phi.k, kn = n * k;
  IntReport rep;
  rep.seed = opts.seed;

  if (mu.kind() == MeasureSpec::Kind::discrete) {
    std::vector<std::size_t> atoms;
    for (std::size_t i = 0; i < mu.points().size(); ++i)
      if (E.contains(mu.points()[i]) && mu.weights()[i] > 0) atoms.push_back(i);
    for (auto i : atoms) rep.mu_E += mu.weights()[i];
    if (atoms.empty()) {
      rep.exact = true;
      return rep;
    }
    Evaluator eval(phi, opts.norm);
    std::vector<double> tuple(kn);
    double tuples = std::pow(static_cast<double>(atoms.size()), static_cast<double>(k));
    if (tuples <= static_cast<double>(opts.exact_limit)) {
      std::vector<std::size_t> pick(k, 0);
      double sum = 0;
      while (true) {
        double w = 1;
        for (std::size_t j = 0; j < k; ++j) {
          const auto& p = mu.points()[atoms[pick[j]]];
          std::copy(p.begin(), p.end(), tuple.begin() + static_cast<std::ptrdiff_t>(j * n));
          w *= mu.weights()[atoms[pick[j]]];
        }
        sum += w * eval(tuple);
        ++rep.samples;
        std::size_t j = 0;
        while (j < k && ++pick[j] == atoms.size()) pick[j++] = 0;
        if (j == k) break;
      }
      rep.value = sum;
      rep.exact = true;
      return rep;
    }
    std::vector<double> w;
    for (auto i : atoms) w.push_back(mu.weights()[i]);
    Rng rng = make_rng(opts.seed, 0);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    double sum = 0, sq = 0;
    for (std::size_t s = 0; s < opts.budget; ++s) {
      for (std::size_t j = 0; j < k; ++j) {
        const auto& p = mu.points()[atoms[pick(rng)]];
        std::copy(p.begin(), p.end(), tuple.begin() + static_cast<std::ptrdiff_t>(j * n));
      }
      double v = eval(tuple);
      sum += v;
      sq += v * v;
    }
    double N = static_cast<double>(opts.budget), mean = sum / N;
    double scale = std::pow(rep.mu_E, static_cast<double>(k));
    rep.value = scale * mean;
    rep.std_error = scale * std::sqrt(std::max(0.0, sq / N - mean * mean) / N);
    rep.samples = opts.budget;
    return rep;
  }

  const double vol = E.volume(opts.seed);
  if (mu.kind() == MeasureSpec::Kind::lebesgue) {
    rep.mu_E = vol;
  } else {
    rep.mu_E = mu.mass(E, opts.seed).value;
  }
  if (vol == 0) {
    rep.exact = true;
    return rep;
  }
  std::optional<CompiledPoly> density;
  if (mu.kind() == MeasureSpec::Kind::weighted) {
    require(mu.density().nvars() == n, "density polynomial has wrong variable count");
    density.emplace(mu.density());
  }
  const double scale = std::pow(vol, static_cast<double>(k));

  // Stratified sampling: equal slabs along the longest axis of each slot.
  const bool stratify = opts.stratified && E.kind() == SetSpec::Kind::box && mu.kind() == MeasureSpec::Kind::lebesgue;
  std::size_t strata_per_slot = 1;
  if (stratify) {
    while (strata_per_slot < 16 &&
           std::pow(static_cast<double>(strata_per_slot + 1), static_cast<double>(k)) * 8 <= static_cast<double>(opts.budget))
      ++strata_per_slot;
  }
  std::size_t cells = 1;
  for (std::size_t j = 0; j < k; ++j) cells *= strata_per_slot;
  const std::size_t per_cell = std::max<std::size_t>(2, opts.budget / cells);
  std::size_t axis = 0;
  if (stratify) {
    const Box& b = E.base();
    for (std::size_t i = 0; i < n; ++i)
      if (b.hi[i] - b.lo[i] > b.hi[axis] - b.lo[axis]) axis = i;
  }

  // Each stratum (or shard when unstratified) owns a seed stream.
  const std::size_t units = stratify ? cells : (opts.budget + kShard - 1) / kShard;
  struct Acc {
    double sum = 0, sq = 0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(units);
  parallel_for(units, opts.threads, [&](std::size_t u) {
    Evaluator eval(phi, opts.norm);
    Rng rng = make_rng(opts.seed, u);
    std::vector<double> tuple(kn);
    std::size_t count = stratify ? per_cell : std::min(kShard, opts.budget - u * kShard);
    std::vector<Box> slot_boxes;
    if (stratify) {
      std::size_t rest = u;
      for (std::size_t j = 0; j < k; ++j) {
        std::size_t idx = rest % strata_per_slot;
        rest /= strata_per_slot;
        Box b = E.base();
        double w = (b.hi[axis] - b.lo[axis]) / static_cast<double>(strata_per_slot);
        b.lo[axis] = E.base().lo[axis] + w * static_cast<double>(idx);
        b.hi[axis] = idx + 1 == strata_per_slot ? E.base().hi[axis] : b.lo[axis] + w;
        slot_boxes.push_back(b);
      }
    }
    Acc& a = acc[u];
    for (std::size_t i = 0; i < count; ++i) {
      double weight = 1;
      for (std::size_t j = 0; j < k; ++j) {
        auto x = stratify ? uniform_in(slot_boxes[j], rng) : E.sample(rng);
        if (density) {
          double w = (*density)(x);
          if (w < 0) throw DomainError("density polynomial is negative on the set");
          weight *= w;
        }
        std::copy(x.begin(), x.end(), tuple.begin() + static_cast<std::ptrdiff_t>(j * n));
      }
      double v = weight * eval(tuple);
      a.sum += v;
      a.sq += v * v;
    }
    a.count = count;
  });

  if (stratify) {
    double est = 0, var = 0;
    for (const auto& a : acc) {
      double m = a.sum / static_cast<double>(a.count);
      double s2 = std::max(0.0, (a.sq - a.sum * m) / static_cast<double>(a.count - 1));
      est += m;
      var += s2 / static_cast<double>(a.count);
      rep.samples += a.count;
    }
    const double H = static_cast<double>(cells);
    rep.value = scale * est / H;
    rep.std_error = scale * std::sqrt(var) / H;
  } else {
    double sum = 0, sq = 0;
    for (const auto& a : acc) {
      sum += a.sum;
      sq += a.sq;
      rep.samples += a.count;
    }
    double N = static_cast<double>(rep.samples), mean = sum / N;
    rep.value = scale * mean;
    rep.std_error = scale * std::sqrt(std::max(0.0, sq / N - mean * mean) / std::max(1.0, N - 1));
  }
  return rep;
}

SweepReport constant_sweep(const PhiSpec& phi, const MeasureSpec& mu, const std::vector<SetSpec>& family, double s,
                           const SupOptions& sup, const IntOptions& integral) {
  require(s > 0, "sweep exponent s must be positive");
  require(!family.empty(), "sweep needs at least one set");
  SweepReport rep;
  rep.s = s;
  rep.k = phi.k;
  rep.seed = sup.seed;
  const double k = static_cast<double>(phi.k);
  bool have = false;
  for (std::size_t i = 0; i < family.size(); ++i) {
    SweepRow row;
    row.mu_E = mu.mass(family[i], derive_seed(integral.seed, i)).value;
    if (!(row.mu_E > 0)) {
      row.skipped = true;
      row.warning = "zero-measure set skipped";
      rep.rows.push_back(row);
      continue;
    }
    SupOptions so = sup;
    so.seed = derive_seed(sup.seed, i);
    IntOptions io = integral;
    io.seed = derive_seed(integral.seed, i);
    row.S = sup_functional(phi, family[i], so).value;
    auto a = int_functional(phi, mu, family[i], io);
    row.A = a.value;
    row.A_stderr = a.std_error;
    row.c_prime = row.S / std::pow(row.mu_E, s);
    row.c = row.A / std::pow(row.mu_E, k + s);
    row.c_stderr = row.A_stderr / std::pow(row.mu_E, k + s);
    row.chain_ok = row.A <= row.S * std::pow(row.mu_E, k) + 3 * row.A_stderr;
    if (!have || row.c_prime < rep.min_c_prime) {
      rep.min_c_prime = row.c_prime;
      rep.argmin_c_prime = i;
    }
    if (!have || row.c < rep.min_c) {
      rep.min_c = row.c;
      rep.min_c_stderr = row.c_stderr;
      rep.argmin_c = i;
    }
    have = true;
    rep.rows.push_back(row);
  }
  if (!have) throw DomainError("every set in the sweep family has zero measure");
  rep.chain_ok = rep.min_c <= rep.min_c_prime + 3 * rep.min_c_stderr;
  return rep;
}

std::vector<std::vector<unsigned>> monomials_up_to(std::size_t nvars, unsigned degree) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> a(nvars, 0);
  for (unsigned d = 0; d <= degree; ++d) {
    auto gen = [&](auto&& self, std::size_t v, unsigned left) -> void {
      if (v + 1 == nvars) {
        a[v] = left;
        out.push_back(a);
        return;
      }
      for (unsigned b = left + 1; b-- > 0;) {
        a[v] = b;
        self(self, v + 1, left - b);
      }
    };
    if (nvars == 0) {
      out.push_back(a);
      break;
    }
    gen(gen, 0, d);
  }
  return out;
}

namespace {

double monomial_value(const std::vector<unsigned>& e, std::span<const double> x) {
  double v = 1;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (unsigned p = 0; p < e[i]; ++p) v *= x[i];
  return v;
}

// min_z sum_i w_i |a_i + b_i . z| by descent along the edges of the
// piecewise-linear objective, started from an iteratively reweighted
// least-squares guess.
Eigen::VectorXd lad_minimize(const Eigen::VectorXd& a, const Eigen::MatrixXd& B, const Eigen::VectorXd& w) {
  const Eigen::Index N = B.rows(), p = B.cols();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
  if (p == 0) return z;
  auto objective = [&](const Eigen::VectorXd& zz) { return (w.array() * (a + B * zz).array().abs()).sum(); };

  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd r = a + B * z;
    Eigen::VectorXd iw = w.array() / r.array().abs().max(1e-9);
    Eigen::MatrixXd H = B.transpose() * iw.asDiagonal() * B;
    Eigen::VectorXd g = B.transpose() * (iw.array() * a.array()).matrix();
    z = -H.ldlt().solve(g);
  }

  // Vertex: p atoms with zero residual and independent rows.
  Eigen::VectorXd r = a + B * z;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return w(i) * std::abs(r(i)) < w(j) * std::abs(r(j));
  });
  std::vector<Eigen::Index> Z;
  Eigen::MatrixXd rows(0, p);
  for (Eigen::Index i : order) {
    if (w(i) <= 0) continue;
    Eigen::MatrixXd trial(rows.rows() + 1, p);
    trial << rows, B.row(i);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      rows = trial;
      Z.push_back(i);
      if (static_cast<Eigen::Index>(Z.size()) == p) break;
    }
  }
  if (static_cast<Eigen::Index>(Z.size()) < p) return z;  // degenerate: keep the reweighted solution
  Eigen::VectorXd rhs(p);
  for (Eigen::Index j = 0; j < p; ++j) rhs(j) = -a(Z[static_cast<std::size_t>(j)]);
  Eigen::VectorXd zv = rows.partialPivLu().solve(rhs);
  if (objective(zv) <= objective(z)) z = zv;
  else return z;

  double scale = std::max(1e-300, w.sum());
  for (int iter = 0; iter < 20 * static_cast<int>(N) + 100; ++iter) {
    r = a + B * z;
    Eigen::MatrixXd BZ(p, p);
    for (Eigen::Index j = 0; j < p; ++j) BZ.row(j) = B.row(Z[static_cast<std::size_t>(j)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(BZ);
    Eigen::MatrixXd Binv = lu.inverse();
    std::vector<bool> inZ(static_cast<std::size_t>(N), false);
    for (auto i : Z) inZ[static_cast<std::size_t>(i)] = true;

    double best_slope = -1e-13 * scale;
    Eigen::VectorXd best_dir;
    Eigen::Index best_leave = -1;
    for (Eigen::Index j = 0; j < p; ++j)
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd d = sgn * Binv.col(j);
        Eigen::VectorXd s = B * d;
        double slope = w(Z[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < N; ++i) {
          if (inZ[static_cast<std::size_t>(i)]) continue;
          if (r(i) > 0) slope += w(i) * s(i);
          else if (r(i) < 0) slope -= w(i) * s(i);
          else slope += w(i) * std::abs(s(i));
        }
        if (slope < best_slope) {
          best_slope = slope;
          best_dir = d;
          best_leave = j;
        }
      }
    if (best_leave < 0) break;

    // Walk the breakpoints of the convex line function.
    Eigen::VectorXd s = B * best_dir;
    std::vector<std::pair<double, Eigen::Index>> bps;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (inZ[static_cast<std::size_t>(i)] || s(i) == 0 || w(i) <= 0) continue;
      double t = -r(i) / s(i);
      if (t > 0) bps.emplace_back(t, i);
    }
    std::sort(bps.begin(), bps.end());
    double slope = best_slope;
    Eigen::Index enter = -1;
    double t_star = 0;
    for (const auto& [t, i] : bps) {
      slope += 2 * w(i) * std::abs(s(i));
      if (slope >= 0) {
        enter = i;
        t_star = t;
        break;
      }
    }
    if (enter < 0) break;  // cannot happen for a coercive objective
    z += t_star * best_dir;
    Z[static_cast<std::size_t>(best_leave)] = enter;
  }
  return z;
}

}  // namespace

ChebyshevResult chebyshev_set(const MeasureSpec& mu, unsigned degree, double tau, const ChebyshevOptions& opts) {
  require(mu.kind() == MeasureSpec::Kind::discrete, "Chebyshev set needs a discrete measure");
  require(tau > 0, "tau must be positive");
  const auto& pts = mu.points();
  const auto& wts = mu.weights();
  const std::size_t nv = pts.front().size();
  ChebyshevResult res;
  res.nvars = nv;
  res.degree = degree;
  res.tau = tau;
  res.seed = opts.seed;
  res.monomials = monomials_up_to(nv, degree);
  const std::size_t Dsp = res.monomials.size();
  res.dim_space = Dsp;

  const auto N = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd V(N, static_cast<Eigen::Index>(Dsp));
  Eigen::VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    w(i) = wts[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < Dsp; ++m)
      V(i, static_cast<Eigen::Index>(m)) = monomial_value(res.monomials[m], pts[static_cast<std::size_t>(i)]);
    res.mu_total += w(i);
  }
  require(res.mu_total > 0, "discrete measure has zero total mass");

  // Split off the polynomials vanishing on the support.
  Eigen::MatrixXd Vs = V;
  for (Eigen::Index i = 0; i < N; ++i)
    if (w(i) == 0) Vs.row(i).setZero();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Vs, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > opts.rank_tol * sv(0)) ++r;
  Eigen::MatrixXd Q = svd.matrixV().leftCols(r);
  for (Eigen::Index j = r; j < static_cast<Eigen::Index>(Dsp); ++j) {
    std::vector<double> c(Dsp);
    for (std::size_t m = 0; m < Dsp; ++m) c[m] = svd.matrixV()(static_cast<Eigen::Index>(m), j);
    res.vanishing.push_back(std::move(c));
  }
  res.dim = static_cast<std::size_t>(r);
  Eigen::MatrixXd G = V * Q;  // values of the quotient coordinates on atoms

  auto norm1 = [&](const Eigen::VectorXd& y) { return (w.array() * (G * y).array().abs()).sum(); };

  // Maximise |det Y| row by row: each row problem is a linear functional
  // over the unit ball of the L1(mu) norm, solved as a weighted LAD.
  auto maximise_row = [&](const Eigen::VectorXd& ell) -> Eigen::VectorXd {
    const Eigen::Index p = r - 1;
    Eigen::VectorXd y0 = ell / ell.squaredNorm();
    Eigen::MatrixXd Nb(r, p);
    if (p > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(ell);
      Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
      Nb = full.rightCols(p);
    }
    Eigen::VectorXd a = G * y0;
    Eigen::MatrixXd B = G * Nb;
    Eigen::VectorXd z = lad_minimize(a, B, w);
    Eigen::VectorXd y = y0 + Nb * z;
    return y / norm1(y);
  };

  double best_logdet = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd bestY;
  if (r > 0) {
    for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opts.restarts); ++restart) {
      Eigen::MatrixXd Y(r, r);
      if (restart == 0) {
        Y.setIdentity();
      } else {
        Rng rng = make_rng(opts.seed, restart);
        std::normal_distribution<double> g(0, 1);
        for (Eigen::Index i = 0; i < r; ++i)
          for (Eigen::Index j = 0; j < r; ++j) Y(i, j) = g(rng);
      }
      for (Eigen::Index i = 0; i < r; ++i) Y.row(i) /= norm1(Y.row(i).transpose());
      double logdet = std::log(std::abs(Y.determinant()));
      if (!std::isfinite(logdet)) continue;
      for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double before = logdet;
        for (Eigen::Index j = 0; j < r; ++j) {
          Eigen::VectorXd ell = Y.inverse().col(j);  // cofactor direction of row j
          Eigen::VectorXd y = maximise_row(ell);
          if (std::abs(ell.dot(y)) > std::abs(ell.dot(Y.row(j).transpose()))) Y.row(j) = y.transpose();
          logdet = std::log(std::abs(Y.determinant()));
        }
        if (logdet - before <= 1e-13 * std::max(1.0, std::abs(before))) break;
      }
      if (logdet > best_logdet) {
        best_logdet = logdet;
        bestY = Y;
      }
    }
    if (!bestY.size()) throw DomainError("Chebyshev set: no nonsingular starting basis");
  }
  res.log_abs_det = r > 0 ? best_logdet : 0.0;

  // Basis in monomial coefficients and the set E_tau.
  const double D = static_cast<double>(r);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(N);
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::VectorXd coef = Q * bestY.row(j).transpose();
    res.basis.emplace_back(coef.data(), coef.data() + coef.size());
    total += (G * bestY.row(j).transpose()).cwiseAbs();
  }
  res.in_E.resize(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    bool in = total(i) <= tau * D;
    res.in_E[static_cast<std::size_t>(i)] = in;
    if (!in) res.mu_complement += w(i);
  }
  res.complement_ok = res.mu_complement < 1.0 / tau;

  // Verification on random polynomials: Cramer coefficients and the sup bound.
  Rng rng = make_rng(opts.seed, 0x76657269);
  std::normal_distribution<double> g(0, 1);
  res.tests = opts.tests;
  Eigen::MatrixXd YinvT = r > 0 ? Eigen::MatrixXd(bestY.transpose().inverse()) : Eigen::MatrixXd();
  for (std::size_t t = 0; t < opts.tests; ++t) {
    std::vector<double> f(Dsp);
    for (auto& c : f) c = g(rng);
    res.max_ratio = std::max(res.max_ratio, chebyshev_ratio(res, mu, f));
    if (r > 0) {
      Eigen::VectorXd fv = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(Dsp));
      Eigen::VectorXd y = Q.transpose() * fv;
      double nrm = norm1(y);
      if (nrm > 0) res.max_cramer = std::max(res.max_cramer, (YinvT * (y / nrm)).cwiseAbs().maxCoeff());
    }
  }
  res.bound_ok = res.max_ratio <= 1.0 + 1e-9;
  return res;
}

double chebyshev_ratio(const ChebyshevResult& res, const MeasureSpec& mu, std::span<const double> f) {
  require(f.size() == res.monomials.size(), "test polynomial has wrong coefficient count");
  double integral = 0, sup = 0;
  for (std::size_t i = 0; i < mu.points().size(); ++i) {
    double v = 0;
    for (std::size_t m = 0; m < f.size(); ++m) v += f[m] * monomial_value(res.monomials[m], mu.points()[i]);
    integral += mu.weights()[i] * std::abs(v);
    if (res.in_E[i] && mu.weights()[i] > 0) sup = std::max(sup, std::abs(v));
  }
  // Polynomials vanishing on the support satisfy the bound trivially.
  if (integral <= 0) return 0.0;
  return sup / (res.tau * static_cast<double>(res.dim) * integral);
}

}  // namespace nonconc
