#pragma once

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <vector>

#include "nonconc/poly.hpp"

namespace nonconc {

// Sparse polynomial with double coefficients, used inside optimisation loops
// where exact arithmetic would be too slow. Variables follow the Phi layout:
// k blocks of n coordinates.
struct FloatPoly {
  struct Term {
    Monomial m;
    double c;
  };

  std::size_t nvars = 0;
  std::vector<Term> terms;

  static FloatPoly from(const Polynomial& p);
};

inline constexpr unsigned kNoDegreeCap = std::numeric_limits<unsigned>::max();

// Product dropping every monomial whose degree in some block exceeds cap.
FloatPoly mul_truncated(const FloatPoly& a, const FloatPoly& b, std::size_t n, std::size_t k, unsigned cap);

// Coefficients of p(M w_1, ..., M w_k), i.e. every block substituted by
// w_j |-> M w_j.
FloatPoly compose_blocks(const FloatPoly& p, const Eigen::MatrixXd& M, std::size_t n, std::size_t k);

// Substitutes variable v by subs[v], truncating to block degree <= cap.
FloatPoly compose_truncated(const FloatPoly& p, std::span<const FloatPoly> subs, std::size_t n, std::size_t k,
                            unsigned cap);

// Per-block degrees of a monomial in the k-block layout.
std::vector<unsigned> block_degrees(const Monomial& m, std::size_t n, std::size_t k);

// Sum of the blocks of a monomial: alpha_1 + ... + alpha_k as an n-vector.
std::vector<unsigned> block_sum(const Monomial& m, std::size_t n, std::size_t k);

}  // namespace nonconc
