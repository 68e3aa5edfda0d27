#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nonconc/poly.hpp"

namespace nonconc {

// Double-precision evaluator for a fixed polynomial, flattened for the inner
// loops of Monte Carlo and quadrature code.
class CompiledPoly {
public:
  CompiledPoly() = default;
  explicit CompiledPoly(const Polynomial& p);

  std::size_t nvars() const { return nvars_; }
  double operator()(std::span<const double> x) const;

private:
  struct Factor {
    std::uint32_t var;
    std::uint32_t exp;
  };
  std::size_t nvars_ = 0;
  std::vector<double> coef_;
  std::vector<std::uint32_t> start_;  // factor range of term i: [start_[i], start_[i+1])
  std::vector<Factor> factors_;
};

class CompiledMap {
public:
  CompiledMap() = default;
  explicit CompiledMap(const PolyVector& v);

  std::size_t size() const { return comps_.size(); }
  std::size_t nvars() const { return comps_.empty() ? 0 : comps_.front().nvars(); }
  const CompiledPoly& operator[](std::size_t i) const { return comps_[i]; }
  void eval(std::span<const double> x, std::span<double> out) const;

private:
  std::vector<CompiledPoly> comps_;
};

}  // namespace nonconc
