#include "nonconc/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nonconc/error.hpp"
#include "nonconc/optimize.hpp"
#include "nonconc/parallel.hpp"
#include "nonconc/simplex.hpp"

namespace nonconc {

namespace {

constexpr double kLogFloor = -745.0;  // log of the smallest positive double

double log_factorial(const Monomial& m, std::size_t nvars) {
  double s = 0;
  for (std::size_t v = 0; v < nvars; ++v) s += std::lgamma(static_cast<double>(m[v]) + 1.0);
  return s;
}

// Skew-symmetric parameters -> orthogonal matrix by the Cayley transform.
Eigen::MatrixXd cayley(std::span<const double> params, std::size_t n) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = params[idx];
      S(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -params[idx];
      ++idx;
    }
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  return (I - S).partialPivLu().solve(I + S);
}

// Coefficients of the components composed with M, merged by monomial.
std::map<Monomial, std::vector<double>> composed_coefficients(std::span<const FloatPoly> comps, const Eigen::MatrixXd& M,
                                                              std::size_t n, std::size_t k) {
  std::map<Monomial, std::vector<double>> out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    FloatPoly p = compose_blocks(comps[c], M, n, k);
    for (const auto& t : p.terms) {
      auto& slot = out[t.m];
      slot.resize(comps.size(), 0.0);
      slot[c] = t.c;
    }
  }
  return out;
}

// Derivative magnitudes alpha! |c_alpha| keyed by monomial.
std::vector<std::pair<Monomial, double>> derivative_magnitudes(std::span<const FloatPoly> comps, const Eigen::MatrixXd& M,
                                                               std::size_t n, std::size_t k, NormKind norm) {
  std::vector<std::pair<Monomial, double>> out;
  for (const auto& [m, cs] : composed_coefficients(comps, M, n, k)) {
    double v = vector_norm(cs, norm);
    if (v > 0) out.emplace_back(m, v * std::exp(log_factorial(m, n * k)));
  }
  return out;
}

// u with sum zero from n-1 free coordinates.
std::vector<double> expand_scaling(std::span<const double> z, std::size_t n) {
  std::vector<double> u(n, 0.0);
  double s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    u[i] = z[i];
    s += z[i];
  }
  if (n > 0) u[n - 1] = -s;
  return u;
}

HullWitness make_witness(const std::vector<std::vector<unsigned>>& cloud, const HullMembership& h,
                         const Eigen::MatrixXd& frame, bool exact) {
  HullWitness w;
  w.cloud = cloud;
  w.kind = h.member ? HullWitness::Kind::weights : HullWitness::Kind::separator;
  w.weights = h.weights;
  w.separator = h.separator;
  w.margin = h.margin;
  w.exact_frame = exact;
  for (Eigen::Index i = 0; i < frame.rows(); ++i)
    for (Eigen::Index j = 0; j < frame.cols(); ++j) w.frame.push_back(frame(i, j));
  return w;
}

HullMembership cloud_membership(const std::vector<std::vector<unsigned>>& cloud, unsigned q, std::size_t n) {
  std::vector<std::vector<Rational>> pts;
  for (const auto& a : cloud) {
    std::vector<Rational> p;
    for (unsigned e : a) p.emplace_back(e);
    pts.push_back(std::move(p));
  }
  std::vector<Rational> target(n, Rational(q, static_cast<unsigned long>(n)));
  for (auto& t : target) t.canonicalize();
  return hull_membership(pts, target);
}

std::vector<std::vector<unsigned>> sorted_unique(std::vector<std::vector<unsigned>> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string to_string(Positivity p) {
  switch (p) {
    case Positivity::positive: return "positive";
    case Positivity::zero: return "zero";
    case Positivity::unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(NormKind k) { return k == NormKind::max ? "max" : "euclidean"; }

NormKind parse_norm(const std::string& name) {
  if (name == "max" || name == "inf") return NormKind::max;
  if (name == "euclidean" || name == "l2") return NormKind::euclidean;
  throw ValidationError("unknown norm '" + name + "' (expected max or euclidean)");
}

Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd G(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < N; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

DiagonalJet diagonal_jet(const PhiSpec& phi, unsigned q, std::span<const Rational> x) {
  phi.validate();
  if (phi.params != 0)
    throw ValidationError("density needs Phi with all parameters frozen (" + std::to_string(phi.params) + " free)");
  require(x.size() == phi.n, "point must have n coordinates");
  PolyVector local = taylor_at_diagonal(phi, x);
  DiagonalJet jet;
  jet.n = phi.n;
  jet.k = phi.k;
  jet.q = q;
  std::vector<Polynomial> top;
  bool any = false;
  for (const auto& c : local.components()) {
    for (const auto& [m, coef] : c.terms())
      if (m.degree() < q)
        throw DomainError("q mismatch: Phi has a nonzero derivative of order " + std::to_string(m.degree()) +
                          " < q = " + std::to_string(q) + " on the diagonal");
    Polynomial h = homogeneous_part(c, q);
    any = any || !h.is_zero();
    jet.approx.push_back(FloatPoly::from(h));
    top.push_back(std::move(h));
  }
  if (!any)
    throw DomainError("q mismatch: every order-" + std::to_string(q) + " diagonal derivative vanishes");
  jet.exact = PolyVector(std::move(top));
  return jet;
}

double density_objective(const DiagonalJet& jet, const Eigen::MatrixXd& T, NormKind norm) {
  require(static_cast<std::size_t>(T.rows()) == jet.n && static_cast<std::size_t>(T.cols()) == jet.n,
          "density_objective: T must be n x n");
  double det = std::abs(T.determinant());
  if (det == 0) throw DomainError("density_objective: singular T");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [m, v] : derivative_magnitudes(jet.approx, T, jet.n, jet.k, norm)) best = std::max(best, std::log(v));
  double expo = static_cast<double>(jet.n) / jet.q;
  return std::exp(expo * best - std::log(det));
}

DensityReport density_infimum(const PhiSpec& phi, unsigned q, std::span<const Rational> x, const DensityOptions& opts) {
  require(q > 0, "density needs q >= 1");
  require(opts.starts > 0, "density needs at least one start");
  DiagonalJet jet = diagonal_jet(phi, q, x);
  const std::size_t n = jet.n, k = jet.k;
  const std::size_t nskew = n * (n - 1) / 2;
  const std::size_t dim = nskew + (n - 1);
  const double expo = static_cast<double>(n) / q;

  struct StartResult {
    double log_value = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd T;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
  };
  std::vector<StartResult> results(opts.starts);

  parallel_for(opts.starts, opts.threads, [&](std::size_t s) {
    Eigen::MatrixXd base = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (s > 0) {
      Rng rng = make_rng(opts.seed, s);
      base = random_orthogonal(n, rng);
    }
    std::size_t evals = 0;
    auto objective = [&](std::span<const double> z) {
      ++evals;
      Eigen::MatrixXd O = base * cayley(z.first(nskew), n);
      auto u = expand_scaling(z.subspan(nskew), n);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& [m, v] : derivative_magnitudes(jet.approx, O, n, k, opts.norm)) {
        auto a = block_sum(m, n, k);
        double l = std::log(v);
        for (std::size_t i = 0; i < n; ++i) l += u[i] * a[i];
        best = std::max(best, l);
      }
      return std::max(kLogFloor, expo * best);
    };
    NelderMeadOptions nm;
    nm.max_iterations = opts.iterations;
    nm.f_tolerance = opts.f_tolerance;
    nm.f_target = std::log(1e-12);
    nm.progress = [](double v) { return std::exp(v); };
    nm.steps.assign(dim, 1.0);
    for (std::size_t i = 0; i < nskew; ++i) nm.steps[i] = 0.5;
    auto r = nelder_mead(objective, std::vector<double>(dim, 0.0), nm);
    StartResult& out = results[s];
    out.log_value = r.value;
    Eigen::MatrixXd O = base * cayley(std::span<const double>(r.x).first(nskew), n);
    auto u = expand_scaling(std::span<const double>(r.x).subspan(nskew), n);
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i)) = std::exp(u[i]);
    out.T = O * d.asDiagonal();
    out.iterations = r.iterations;
    out.evaluations = evals;
  });

  DensityReport rep;
  for (const auto& v : x) rep.point.push_back(to_double(v));
  rep.n = n;
  rep.q = q;
  rep.seed = opts.seed;
  rep.starts = opts.starts;
  rep.norm = opts.norm;
  std::size_t best = 0;
  for (std::size_t s = 0; s < results.size(); ++s) {
    rep.iterations += results[s].iterations;
    rep.evaluations += results[s].evaluations;
    if (results[s].log_value < results[best].log_value) best = s;
  }
  rep.upper = results[best].log_value <= kLogFloor ? 0.0 : std::exp(results[best].log_value);
  rep.certificate_T = results[best].T;
  if (opts.run_positivity) rep.positivity = positivity_criterion(jet, opts.o_samples, opts);
  return rep;
}

PositivityResult positivity_criterion(const PhiSpec& phi, unsigned q, std::span<const Rational> x,
                                      std::size_t o_samples, const DensityOptions& opts) {
  return positivity_criterion(diagonal_jet(phi, q, x), o_samples, opts);
}

PositivityResult positivity_criterion(const DiagonalJet& jet, std::size_t o_samples, const DensityOptions& opts) {
  const std::size_t n = jet.n, k = jet.k;
  const auto N = static_cast<Eigen::Index>(n);
  PositivityResult res;
  res.sampled_frames = o_samples;

  // Exact cloud at the identity frame.
  std::vector<std::vector<unsigned>> exact_cloud;
  for (const auto& c : jet.exact.components())
    for (const auto& [m, coef] : c.terms()) exact_cloud.push_back(block_sum(m, n, k));
  exact_cloud = sorted_unique(std::move(exact_cloud));
  HullMembership id = cloud_membership(exact_cloud, jet.q, n);
  res.identity_member = id.member;
  res.witness = make_witness(exact_cloud, id, Eigen::MatrixXd::Identity(N, N), true);
  if (!id.member) {
    res.verdict = Positivity::zero;
    return res;
  }

  struct Sample {
    bool robust_member = false;
    bool loose_member = true;
    std::vector<std::vector<unsigned>> loose_cloud;
    HullMembership loose;
    Eigen::MatrixXd O;
  };
  std::vector<Sample> samples(o_samples);
  parallel_for(o_samples, opts.threads, [&](std::size_t s) {
    Rng rng = make_rng(opts.seed, 1'000'000 + s);
    Sample& out = samples[s];
    out.O = random_orthogonal(n, rng);
    auto mags = derivative_magnitudes(jet.approx, out.O, n, k, opts.norm);
    double top = 0;
    for (const auto& [m, v] : mags) top = std::max(top, v);
    std::vector<std::vector<unsigned>> robust, loose;
    for (const auto& [m, v] : mags) {
      if (v >= opts.robust_threshold * top) robust.push_back(block_sum(m, n, k));
      if (v > opts.zero_threshold * top) loose.push_back(block_sum(m, n, k));
    }
    robust = sorted_unique(std::move(robust));
    out.loose_cloud = sorted_unique(std::move(loose));
    out.robust_member = !robust.empty() && cloud_membership(robust, jet.q, n).member;
    out.loose = cloud_membership(out.loose_cloud, jet.q, n);
    out.loose_member = out.loose.member;
  });

  for (const auto& s : samples) {
    if (!s.loose_member) {
      res.verdict = Positivity::zero;
      res.witness = make_witness(s.loose_cloud, s.loose, s.O, false);
      return res;
    }
    if (s.robust_member) ++res.robust_passes;
  }
  res.verdict = res.robust_passes == o_samples ? Positivity::positive : Positivity::unknown;
  return res;
}

TriangularBound triangular_determinantal_bound(std::size_t nprime, const Eigen::MatrixXd& T, double tol) {
  require(nprime >= 1 && nprime <= 3, "triangular bound needs 1 <= n' <= 3");
  const std::size_t dim = nprime * nprime;
  require(static_cast<std::size_t>(T.rows()) == dim && static_cast<std::size_t>(T.cols()) == dim,
          "triangular bound: T must be n'^2 x n'^2");
  for (Eigen::Index i = 0; i < T.rows(); ++i)
    for (Eigen::Index j = i + 1; j < T.cols(); ++j)
      require(T(i, j) == 0.0, "triangular bound: T must be lower triangular");
  double det = 1;
  for (Eigen::Index i = 0; i < T.rows(); ++i) det *= T(i, i);
  if (det == 0) throw DomainError("triangular bound: singular T");

  // Derivatives in the first slot of det(A1 - A2) at A1 = A2 are those of
  // det(W) at W = 0.
  PolyMatrix W(nprime, std::vector<Polynomial>(nprime));
  for (std::size_t i = 0; i < nprime; ++i)
    for (std::size_t j = 0; j < nprime; ++j) W[i][j] = Polynomial::variable(dim, i * nprime + j);
  FloatPoly detw = FloatPoly::from(det_cofactor(W));
  FloatPoly composed = compose_blocks(detw, T, dim, 1);

  TriangularBound out;
  for (const auto& t : composed.terms)
    out.max_derivative = std::max(out.max_derivative, std::abs(t.c) * std::exp(log_factorial(t.m, dim)));
  out.det_root = std::pow(std::abs(det), 1.0 / static_cast<double>(nprime));
  out.holds = out.max_derivative >= out.det_root - tol;
  return out;
}

MultisystemReport multisystem_density(const PhiSpec& phi, const Rational& s, unsigned N,
                                      const std::vector<CoordinateChange>& family, std::span<const Rational> x,
                                      const DensityOptions& opts) {
  phi.validate();
  if (phi.params != 0)
    throw ValidationError("multisystem density needs Phi with all parameters frozen");
  require(s > 0, "multisystem density needs s > 0");
  require(N >= 1, "multisystem density needs N >= 1");
  require(x.size() == phi.n, "point must have n coordinates");
  require(opts.starts > 0, "multisystem density needs at least one start");
  const std::size_t n = phi.n, k = phi.k;
  const auto En = static_cast<Eigen::Index>(n);

  std::vector<CoordinateChange> members = family;
  if (members.empty()) {
    std::vector<Polynomial> id;
    for (std::size_t i = 0; i < n; ++i) id.push_back(Polynomial::variable(n, i));
    members.push_back({"standard", PolyVector(std::move(id))});
  }

  // Frame inverses d chi(0)^{-1}, checked exactly.
  std::vector<Eigen::MatrixXd> frame_inv;
  std::vector<std::vector<FloatPoly>> chis;
  for (const auto& ch : members) {
    require(ch.map.size() == n && ch.map.nvars() == n,
            "coordinate change '" + ch.name + "' must have n components in n variables");
    RationalMatrix D(n, std::vector<Rational>(n));
    std::vector<FloatPoly> comps;
    for (std::size_t i = 0; i < n; ++i) {
      const Polynomial& c = ch.map[i];
      require(c.constant_term() == 0, "coordinate change '" + ch.name + "' must fix the origin");
      for (const auto& [m, coef] : c.terms())
        if (m.degree() == 1)
          for (std::size_t v = 0; v < n; ++v)
            if (m[v] == 1) D[i][v] = coef;
      comps.push_back(FloatPoly::from(c));
    }
    if (determinant(D) == 0)
      throw DomainError("non-invertible coordinate change at x: '" + ch.name + "'");
    RationalMatrix Di = inverse(D);
    Eigen::MatrixXd E(En, En);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_double(Di[i][j]);
    frame_inv.push_back(E);
    chis.push_back(std::move(comps));
  }

  PolyVector local = taylor_at_diagonal(phi, x);
  std::vector<FloatPoly> taylor;
  bool any_low = false;
  for (const auto& c : local.components()) {
    FloatPoly f = FloatPoly::from(c);
    for (const auto& t : f.terms) {
      auto bd = block_degrees(t.m, n, k);
      if (std::all_of(bd.begin(), bd.end(), [&](unsigned d) { return d <= N; })) any_low = true;
    }
    taylor.push_back(std::move(f));
  }

  MultisystemReport rep;
  rep.seed = opts.seed;
  rep.member_values.assign(members.size(), 0.0);
  rep.certificate_T = Eigen::MatrixXd::Identity(En, En);
  // Substituting an invertible jet map block by block preserves the part of
  // block degree <= N, so if that part is zero every derivative vanishes.
  if (!any_low) return rep;

  const double inv_s = 1.0 / to_double(s);
  const std::size_t nskew = n * (n - 1) / 2;
  const std::size_t dim = nskew + n;
  const std::size_t kn = n * k;

  auto evaluate = [&](std::size_t member, const Eigen::MatrixXd& T) {
    Eigen::MatrixXd M = frame_inv[member] * T;
    std::vector<FloatPoly> subs(kn);
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<FloatPoly> lin(n);
      for (std::size_t l = 0; l < n; ++l) {
        lin[l].nvars = kn;
        for (std::size_t c = 0; c < n; ++c) {
          double w = M(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c));
          if (w != 0.0) lin[l].terms.push_back({Monomial::unit(j * n + c), w});
        }
      }
      for (std::size_t i = 0; i < n; ++i) subs[j * n + i] = compose_truncated(chis[member][i], lin, n, k, N);
    }
    double best = -std::numeric_limits<double>::infinity();
    std::map<Monomial, std::vector<double>> merged;
    for (std::size_t c = 0; c < taylor.size(); ++c) {
      FloatPoly p = compose_truncated(taylor[c], subs, n, k, N);
      for (const auto& t : p.terms) {
        auto& slot = merged[t.m];
        slot.resize(taylor.size(), 0.0);
        slot[c] = t.c;
      }
    }
    for (const auto& [m, cs] : merged) {
      double v = vector_norm(cs, opts.norm);
      if (v > 0) best = std::max(best, inv_s * (std::log(v) + log_factorial(m, kn)));
    }
    return best - std::log(std::abs(T.determinant()));
  };

  struct StartResult {
    double value = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd T;
  };
  const std::size_t total = members.size() * opts.starts;
  std::vector<StartResult> results(total);
  parallel_for(total, opts.threads, [&](std::size_t idx) {
    std::size_t member = idx / opts.starts, start = idx % opts.starts;
    Eigen::MatrixXd base = Eigen::MatrixXd::Identity(En, En);
    if (start > 0) {
      Rng rng = make_rng(opts.seed, 2'000'000 + start);
      base = random_orthogonal(n, rng);
    }
    auto to_T = [&](std::span<const double> z) {
      Eigen::VectorXd d(En);
      for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i)) = std::exp(z[nskew + i]);
      return Eigen::MatrixXd(base * cayley(z.first(nskew), n) * d.asDiagonal());
    };
    auto objective = [&](std::span<const double> z) { return std::max(kLogFloor, evaluate(member, to_T(z))); };
    NelderMeadOptions nm;
    nm.max_iterations = opts.iterations;
    nm.f_tolerance = opts.f_tolerance;
    nm.f_target = std::log(1e-12);
    nm.progress = [](double v) { return std::exp(v); };
    nm.steps.assign(dim, 1.0);
    for (std::size_t i = 0; i < nskew; ++i) nm.steps[i] = 0.5;
    auto r = nelder_mead(objective, std::vector<double>(dim, 0.0), nm);
    results[idx].value = r.value;
    results[idx].T = to_T(r.x);
  });

  double best_log = std::numeric_limits<double>::infinity();
  for (std::size_t member = 0; member < members.size(); ++member) {
    double mv = std::numeric_limits<double>::infinity();
    std::size_t arg = member * opts.starts;
    for (std::size_t st = 0; st < opts.starts; ++st) {
      std::size_t idx = member * opts.starts + st;
      if (results[idx].value < mv) {
        mv = results[idx].value;
        arg = idx;
      }
    }
    rep.member_values[member] = mv <= kLogFloor ? 0.0 : std::exp(mv);
    if (mv < best_log) {
      best_log = mv;
      rep.best_member = member;
      rep.certificate_T = results[arg].T;
    }
  }
  rep.value = best_log <= kLogFloor ? 0.0 : std::exp(best_log);
  return rep;
}

}  // namespace nonconc
