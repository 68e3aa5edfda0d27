#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nonconc {

struct NelderMeadOptions {
  std::size_t max_iterations = 500;
  // Stop when the best value, mapped through `progress`, has moved by less
  // than this over the last 2*(dim+1) iterations.
  double f_tolerance = 1e-10;
  // Stop early once the best value drops to this level.
  double f_target = -std::numeric_limits<double>::infinity();
  double size_tolerance = 1e-12;
  // Initial simplex step per coordinate; a single entry applies to all.
  std::vector<double> steps{0.5};
  std::function<double(double)> progress;  // identity when empty
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Derivative-free minimisation backed by GSL's nmsimplex2. Non-finite
// objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

}  // namespace nonconc
