#pragma once

#include <optional>
#include <vector>

#include "nonconc/density.hpp"
#include "nonconc/functionals.hpp"

namespace nonconc {

struct CoverOptions {
  SupOptions sup = [] {
    SupOptions o;
    o.budget = 2000;
    o.polish_starts = 1;
    o.polish_iterations = 100;
    return o;
  }();
  unsigned threads = 0;
  // Cells allowed in one cover.
  std::size_t max_cells = std::size_t{1} << 20;
};

struct CoverEstimate {
  double sigma = 0;
  double delta = 0;  // cell diameter
  double value = 0;  // sum over cells of S(cell)^sigma, all weights 1
  std::vector<unsigned> levels;  // dyadic level per axis
  std::size_t cells = 0;
  // All cells are translates and Phi is translation invariant, so one
  // sup estimate served every cell.
  bool translation_shortcut = false;
  std::uint64_t seed = 0;
};

// Phi(x_1 + c, ..., x_k + c) == Phi(x_1, ..., x_k) as polynomials.
bool is_translation_invariant(const PhiSpec& phi);

// Uniform dyadic cover of the box E with 2^level cells per axis.
CoverEstimate cover_upper(const PhiSpec& phi, double sigma, const Box& E, unsigned grid_level,
                          const CoverOptions& opts = {});
// Same with a separate level per axis (thin cells for anisotropic Phi).
CoverEstimate cover_upper(const PhiSpec& phi, double sigma, const Box& E, const std::vector<unsigned>& levels,
                          const CoverOptions& opts = {});

struct ComparabilityReport {
  unsigned q = 0;
  double sigma = 0;  // n/q
  unsigned level = 0;
  CoverEstimate isotropic;
  CoverEstimate best;  // least value over per-axis levels in [0, level]
  double riemann = 0;  // sum over cells of density(center) * |cell|
  bool density_constant = false;
  bool density_zero = false;
  std::optional<double> ratio;  // best.value / riemann when the density is nonzero
};

ComparabilityReport density_comparability_check(const PhiSpec& phi, unsigned q, const Box& E, unsigned grid_level,
                                                const DensityOptions& dens = {}, const CoverOptions& cover = {});

}  // namespace nonconc
