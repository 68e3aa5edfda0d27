#pragma once

#include <span>
#include <vector>

#include "nonconc/rational.hpp"

namespace nonconc {

// maximize c.x subject to A x = b, x >= 0, in exact rational arithmetic.
struct LinearProgram {
  RationalMatrix A;
  std::vector<Rational> b;
  std::vector<Rational> c;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<Rational> x;
  Rational value;
};

// Two-phase tableau simplex with Bland's rule, so it cannot cycle.
LpResult solve_lp(const LinearProgram& lp);

struct HullMembership {
  bool member = false;
  // Convex weights over the input points when member.
  std::vector<Rational> weights;
  // When not member: l with l.(p - target) >= margin > 0 for every point,
  // normalised to max |l_i| = 1 (and sum l_i = 0 when all points and the
  // target share a coordinate sum).
  std::vector<Rational> separator;
  Rational margin;
};

// Decides target in conv(points) exactly.
HullMembership hull_membership(std::span<const std::vector<Rational>> points, std::span<const Rational> target);

}  // namespace nonconc
