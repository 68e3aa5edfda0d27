#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonconc/compiled.hpp"
#include "nonconc/geometry.hpp"
#include "nonconc/norm.hpp"
#include "nonconc/random.hpp"

namespace nonconc {

struct Box {
  std::vector<double> lo, hi;

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
};

// Finitely described bounded set in R^d.
class SetSpec {
public:
  enum class Kind { box, affine, set_union, predicate };

  static SetSpec box(std::vector<double> lo, std::vector<double> hi);
  // { A y + offset : y in base }, A nonsingular.
  static SetSpec affine(Eigen::MatrixXd A, std::vector<double> offset, Box base);
  static SetSpec set_union(std::vector<SetSpec> parts);
  // { x in bbox : p(x) >= 0 for every constraint }.
  static SetSpec predicate(std::vector<Polynomial> constraints, Box bbox);
  static SetSpec point(std::vector<double> x);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Box& base() const { return box_; }
  const Eigen::MatrixXd& matrix() const { return A_; }
  const std::vector<double>& offset() const { return offset_; }
  const std::vector<SetSpec>& parts() const { return parts_; }
  const std::vector<Polynomial>& constraints() const { return constraints_; }

  bool contains(std::span<const double> x) const;
  Box bounding_box() const;
  // Exact for boxes, affine images and unions of boxes; Monte Carlo with
  // `samples` draws otherwise.
  double volume(std::uint64_t seed = 0, std::size_t samples = 200000) const;
  bool volume_is_exact() const;
  // Uniform sample; throws DomainError when the set looks empty.
  std::vector<double> sample(Rng& rng) const;
  // Vertices of the convex pieces (boxes and affine images); empty for
  // predicate sets.
  std::vector<std::vector<double>> corners() const;
  // A nearby point of the set (clamping in box coordinates); nullopt for a
  // predicate set when x falls outside it.
  std::optional<std::vector<double>> project(std::span<const double> x) const;
  // Image under x -> L x + b.
  SetSpec mapped(const Eigen::MatrixXd& L, std::span<const double> b) const;

private:
  Kind kind_ = Kind::box;
  std::size_t dim_ = 0;
  Box box_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd A_inv_;
  std::vector<double> offset_;
  std::vector<SetSpec> parts_;
  std::vector<Polynomial> constraints_;
  std::vector<CompiledPoly> compiled_;
  std::vector<double> part_volumes_;
};

class MeasureSpec {
public:
  enum class Kind { lebesgue, weighted, discrete };

  static MeasureSpec lebesgue();
  // d mu = w(x) dx with w a polynomial, required nonnegative where sampled.
  static MeasureSpec weighted(Polynomial density);
  static MeasureSpec discrete(std::vector<std::vector<double>> points, std::vector<double> weights);

  Kind kind() const { return kind_; }
  const Polynomial& density() const { return density_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  struct Mass {
    double value = 0;
    double std_error = 0;
  };
  // mu(E); exact for Lebesgue on exact-volume sets and for discrete measures.
  Mass mass(const SetSpec& E, std::uint64_t seed = 0, std::size_t samples = 200000) const;

private:
  Kind kind_ = Kind::lebesgue;
  Polynomial density_;
  std::vector<std::vector<double>> points_;
  std::vector<double> weights_;
};

struct SupOptions {
  std::uint64_t seed = 0;
  std::size_t budget = 200000;  // sampled k-tuples
  std::size_t corner_limit = 20000;  // max corner k-tuples tried exactly
  std::size_t polish_starts = 4;
  std::size_t polish_iterations = 400;
  NormKind norm = NormKind::max;
  unsigned threads = 0;
};

struct SupReport {
  double value = 0;  // max |Phi| over evaluated tuples: a lower bound for S(E)
  std::vector<std::vector<double>> argmax;  // k points
  std::size_t evaluated = 0;
  std::uint64_t seed = 0;
};

// S(E) = sup over E^k of |Phi|, estimated from below.
SupReport sup_functional(const PhiSpec& phi, const SetSpec& E, const SupOptions& opts = {});

struct IntOptions {
  std::uint64_t seed = 0;
  std::size_t budget = 1000000;
  // Stratify each slot along the longest box axis (boxes, Lebesgue only).
  bool stratified = false;
  // Discrete measures: enumerate all atom k-tuples when there are at most
  // this many.
  std::size_t exact_limit = 2000000;
  NormKind norm = NormKind::max;
  unsigned threads = 0;
};

struct IntReport {
  double value = 0;
  double std_error = 0;
  double mu_E = 0;
  std::size_t samples = 0;
  bool exact = false;
  std::uint64_t seed = 0;
};

// A(E) = integral over E^k of |Phi| d mu^k.
IntReport int_functional(const PhiSpec& phi, const MeasureSpec& mu, const SetSpec& E, const IntOptions& opts = {});

struct SweepRow {
  double mu_E = 0;
  double S = 0;
  double A = 0;
  double A_stderr = 0;
  double c_prime = 0;  // S / mu^s
  double c = 0;        // A / mu^(k+s)
  double c_stderr = 0;
  // A <= S mu^k within 3 standard errors.
  bool chain_ok = false;
  bool skipped = false;
  std::string warning;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double s = 0;
  std::size_t k = 0;
  double min_c_prime = 0;  // family-restricted ||S||
  double min_c = 0;        // family-restricted ||A||
  double min_c_stderr = 0;
  std::size_t argmin_c_prime = 0;
  std::size_t argmin_c = 0;
  // min c <= min c' within 3 standard errors.
  bool chain_ok = false;
  std::uint64_t seed = 0;
};

SweepReport constant_sweep(const PhiSpec& phi, const MeasureSpec& mu, const std::vector<SetSpec>& family, double s,
                           const SupOptions& sup = {}, const IntOptions& integral = {});

struct ChebyshevOptions {
  std::uint64_t seed = 0;
  std::size_t restarts = 16;
  std::size_t max_sweeps = 60;
  std::size_t tests = 100;  // random polynomials used in the verification
  double rank_tol = 1e-10;
};

struct ChebyshevResult {
  std::size_t nvars = 0;
  unsigned degree = 0;
  std::size_t dim_space = 0;  // monomials of degree <= d
  std::size_t dim = 0;        // D: dimension modulo functions vanishing on the support
  std::vector<std::vector<unsigned>> monomials;
  // Rows: coefficients (monomial basis) of the extremal f_1..f_D.
  std::vector<std::vector<double>> basis;
  // Coefficients of a basis of polynomials vanishing on every atom.
  std::vector<std::vector<double>> vanishing;
  double log_abs_det = 0;
  double tau = 0;
  std::vector<bool> in_E;  // per atom
  double mu_total = 0;
  double mu_complement = 0;
  bool complement_ok = false;  // mu(X \ E_tau) < 1/tau strictly
  double max_cramer = 0;       // max |c_j| over normalised test functions
  double max_ratio = 0;        // max sup_E|f| / (tau D int|f| dmu)
  std::size_t tests = 0;
  bool bound_ok = false;
  std::uint64_t seed = 0;
};

// Chebyshev set for polynomials of degree <= d on a discrete
// measure (points in R^nvars).
ChebyshevResult chebyshev_set(const MeasureSpec& mu, unsigned degree, double tau, const ChebyshevOptions& opts = {});

// Checks the two conclusions for one coefficient vector f (monomial basis):
// returns sup_{E_tau}|f| / (tau D int|f| dmu) (<= 1 means the bound holds).
double chebyshev_ratio(const ChebyshevResult& res, const MeasureSpec& mu, std::span<const double> f);

std::vector<std::vector<unsigned>> monomials_up_to(std::size_t nvars, unsigned degree);

}  // namespace nonconc
