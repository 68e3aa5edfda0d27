#include "nonconc/compiled.hpp"

namespace nonconc {

CompiledPoly::CompiledPoly(const Polynomial& p) : nvars_(p.nvars()) {
  start_.push_back(0);
  for (const auto& [m, c] : p.terms()) {
    coef_.push_back(to_double(c));
    for (std::size_t v = 0; v < nvars_; ++v)
      if (m[v]) factors_.push_back({static_cast<std::uint32_t>(v), m[v]});
    start_.push_back(static_cast<std::uint32_t>(factors_.size()));
  }
}

double CompiledPoly::operator()(std::span<const double> x) const {
  double sum = 0;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    double term = coef_[t];
    for (std::uint32_t f = start_[t]; f < start_[t + 1]; ++f) {
      double b = x[factors_[f].var];
      double p = b;
      for (std::uint32_t e = 1; e < factors_[f].exp; ++e) p *= b;
      term *= p;
    }
    sum += term;
  }
  return sum;
}

CompiledMap::CompiledMap(const PolyVector& v) {
  for (const auto& c : v.components()) comps_.emplace_back(c);
}

void CompiledMap::eval(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i](x);
}

}  // namespace nonconc
