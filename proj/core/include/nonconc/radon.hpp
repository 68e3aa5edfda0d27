#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nonconc/density.hpp"
#include "nonconc/functionals.hpp"
#include "nonconc/geometry.hpp"

namespace nonconc {

// Membership rule for the truncation set in (t, x) space.
class OmegaRule {
public:
  enum class Kind { full, set, density_threshold };

  static OmegaRule full();
  // A set in R^{n + N2}, coordinates (t, x).
  static OmegaRule from_set(SetSpec set);
  // (t, x) is in the set iff the order-q density of Phi_x at t is at least
  // `level`. Evaluations are cached; when Phi_x is translation invariant in t
  // the cache is keyed by x alone, and by nothing when Phi ignores x too.
  static OmegaRule density_threshold(const GammaSpec& gamma, unsigned q, double level, DensityOptions opts = {});

  Kind kind() const { return kind_; }
  const std::optional<SetSpec>& set() const { return set_; }
  unsigned q() const { return q_; }
  double level() const { return level_; }

  bool contains(std::span<const double> t, std::span<const double> x) const;
  // Density of Phi_x at t used by the threshold rule (+inf when Phi_x vanishes
  // to lower order than q there, 0 when to higher order or identically).
  double density_at(std::span<const double> t, std::span<const double> x) const;
  std::size_t cached_evaluations() const;

private:
  struct Cache {
    std::mutex mutex;
    std::map<std::vector<double>, double> values;
  };
  Kind kind_ = Kind::full;
  std::optional<SetSpec> set_;
  PhiSpec phi_;
  unsigned q_ = 0;
  double level_ = 0;
  DensityOptions opts_;
  bool invariant_in_t_ = false;
  bool ignores_x_ = false;
  std::shared_ptr<Cache> cache_;
};

struct RadonCase {
  std::string name;
  GammaSpec gamma;
  OmegaRule omega = OmegaRule::full();
  double s = 1;
  double delta = 1;
  Box t_window;
  Box x_window;
  double cap = 10;  // accepted bound for rho
  // Text describing where delta comes from (analytic bound or sampling).
  std::string hypothesis;
};

// Midpoint-rule measure of { t in t_window : gamma(t, x) in F, (t, x) in Omega }.
double apply_operator(const RadonCase& rc, const SetSpec& F, std::span<const double> x, std::size_t quad_n);

struct LpOptions {
  double p = 0;              // 0 means k + s
  std::size_t x_grid = 128;  // midpoints per x axis
  std::size_t quad_n = 256;  // midpoints per t axis
  // Recompute every norm at doubled t and x resolution and warn on shifts
  // above `doubling_tolerance`.
  bool doubling = true;
  double doubling_tolerance = 0.05;
  unsigned threads = 0;
};

struct LpRow {
  double measure = 0;  // |F|
  double norm = 0;     // ||T chi_F||_p over x_window
  double refined_norm = 0;
  std::optional<double> rho;  // undefined for |F| = 0
  bool resolution_warning = false;
};

struct LpReport {
  std::vector<LpRow> rows;
  double p = 0;
  double max_rho = 0;
  double min_rho = 0;
  std::size_t argmax = 0;
  std::size_t warnings = 0;
  bool pass = false;  // max rho <= cap
};

// L^p norm of T chi_F over x_window by the midpoint rule.
double operator_norm(const RadonCase& rc, const SetSpec& F, double p, std::size_t x_grid, std::size_t quad_n,
                     unsigned threads = 0);

// rho(F) = ||T chi_F||_p delta^{1/(k+s)} / |F|^{k/(k+s)} for every F.
LpReport lp_ratio_check(const RadonCase& rc, const std::vector<SetSpec>& family, const LpOptions& opts = {});

struct HypothesisSample {
  std::vector<double> x;
  double measure = 0;  // |E|
  double integral = 0;
  double std_error = 0;
  double required = 0;  // delta |E|^{k+s}
  bool holds = false;   // integral >= required - 3 std_error
};

struct HypothesisReport {
  std::vector<HypothesisSample> samples;
  std::size_t failures = 0;
  bool pass = false;
  std::uint64_t seed = 0;
};

struct HypothesisOptions {
  std::uint64_t seed = 0;
  std::size_t samples = 50;
  std::size_t max_pieces = 3;  // E is a union of up to this many boxes
  IntOptions integral = [] {
    IntOptions o;
    o.budget = 200000;
    return o;
  }();
};

// Samples x in x_window and E (union of boxes inside the t-slice of Omega
// at x) and checks int_{E^k} |Phi_x| >= delta |E|^{k+s}.
HypothesisReport hypothesis_spot_check(const RadonCase& rc, const HypothesisOptions& opts = {});

// `count` unions of 1..max_pieces axis-parallel boxes inside `bounds`, each
// side between min_side and max_side times the matching side of `bounds`.
std::vector<SetSpec> random_box_unions(std::size_t count, std::size_t max_pieces, const Box& bounds,
                                       std::uint64_t seed, double min_side = 0.2, double max_side = 0.7);

// Omega rule from density sublevels: density of Phi_x at t >= c delta^{n/q}.
OmegaRule build_omega_tilde(const GammaSpec& gamma, unsigned q, double c, double delta, DensityOptions opts = {});

}  // namespace nonconc
