#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonconc/diagonal.hpp"
#include "nonconc/jet.hpp"
#include "nonconc/norm.hpp"
#include "nonconc/random.hpp"

namespace nonconc {

enum class Positivity { positive, zero, unknown };

std::string to_string(Positivity p);

struct DensityOptions {
  std::uint64_t seed = 0;
  std::size_t starts = 64;
  std::size_t iterations = 500;
  double f_tolerance = 1e-10;
  // Orthogonal frames sampled by the positivity criterion.
  std::size_t o_samples = 200;
  // A sampled-frame cloud keeps coefficients at least this fraction of the
  // largest; membership of the diagonal point in this robust cloud is the
  // "pass with margin" test.
  double robust_threshold = 1e-6;
  // Coefficients below this fraction of the largest count as zero.
  double zero_threshold = 1e-10;
  NormKind norm = NormKind::max;
  unsigned threads = 0;
  bool run_positivity = true;
};

// Convex-hull certificate for one frame.
struct HullWitness {
  enum class Kind { none, weights, separator };
  Kind kind = Kind::none;
  // Distinct exponent sums alpha_1 + ... + alpha_k in the cloud.
  std::vector<std::vector<unsigned>> cloud;
  // Convex weights (one per cloud entry) when the point is inside.
  std::vector<Rational> weights;
  // l with l . Sigma a > (q/n) l . 1 for every cloud entry, when outside.
  std::vector<Rational> separator;
  Rational margin;
  // Frame at which the certificate was found (row-major n x n).
  std::vector<double> frame;
  bool exact_frame = false;
};

struct PositivityResult {
  Positivity verdict = Positivity::unknown;
  std::size_t sampled_frames = 0;
  std::size_t robust_passes = 0;
  bool identity_member = false;
  HullWitness witness;
};

struct DensityReport {
  std::vector<double> point;
  std::size_t n = 0;
  unsigned q = 0;
  double upper = 0;  // best F found, an upper bound for the infimum
  Eigen::MatrixXd certificate_T;
  std::optional<PositivityResult> positivity;
  std::uint64_t seed = 0;
  std::size_t starts = 0;
  std::size_t iterations = 0;   // summed over starts
  std::size_t evaluations = 0;  // objective calls
  NormKind norm = NormKind::max;
};

// Order-q Taylor part of Phi at (x, ..., x): sum over |alpha| = q of
// d^alpha Phi / alpha! w^alpha, exact and as floats.
struct DiagonalJet {
  std::size_t n = 0;
  std::size_t k = 0;
  unsigned q = 0;
  PolyVector exact;
  std::vector<FloatPoly> approx;
};

// Throws DomainError when a lower-order coefficient is nonzero (q mismatch)
// and ValidationError when Phi still has free parameters.
DiagonalJet diagonal_jet(const PhiSpec& phi, unsigned q, std::span<const Rational> x);

// F(T) = max_{|alpha| = q} |(T^* d)^alpha Phi(x..x)|^{n/q} / |det T|.
double density_objective(const DiagonalJet& jet, const Eigen::MatrixXd& T, NormKind norm = NormKind::max);

// Multi-start Nelder-Mead over T = O diag(e^u), sum u = 0.
DensityReport density_infimum(const PhiSpec& phi, unsigned q, std::span<const Rational> x,
                              const DensityOptions& opts = {});

// Exponent-cloud hull test at the exact identity frame plus sampled frames.
PositivityResult positivity_criterion(const PhiSpec& phi, unsigned q, std::span<const Rational> x,
                                      std::size_t o_samples, const DensityOptions& opts = {});
PositivityResult positivity_criterion(const DiagonalJet& jet, std::size_t o_samples, const DensityOptions& opts = {});

struct TriangularBound {
  double max_derivative = 0;  // max_{|alpha| = n'} |(T^* d)^alpha_1 det(A1 - A2)|
  double det_root = 0;        // |det T|^{1/n'}
  bool holds = false;         // max_derivative >= det_root - tol
};

// T is an n'^2 x n'^2 lower-triangular matrix acting on matrix entries in
// lexicographic order. Throws DomainError if T is singular.
TriangularBound triangular_determinantal_bound(std::size_t nprime, const Eigen::MatrixXd& T, double tol = 1e-9);

// Polynomial change of coordinates z |-> chi(z) near a base point, with
// chi(0) = 0; the derivative frame is d chi(0).
struct CoordinateChange {
  std::string name;
  PolyVector map;  // n components in n variables
};

struct MultisystemReport {
  double value = 0;  // min over the family of the optimised objective
  std::size_t best_member = 0;
  std::vector<double> member_values;
  Eigen::MatrixXd certificate_T;
  std::uint64_t seed = 0;
};

// Restricted density with |alpha_j| <= N in every slot, derivatives taken in
// the coordinates of each family member, exponent 1/s, minimised over
// T = O diag(e^u) with u unconstrained (mixed orders are not scale
// invariant). An empty family means standard coordinates only.
MultisystemReport multisystem_density(const PhiSpec& phi, const Rational& s, unsigned N,
                                      const std::vector<CoordinateChange>& family, std::span<const Rational> x,
                                      const DensityOptions& opts = {});

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
// of R's diagonal fixed).
Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng);

}  // namespace nonconc
