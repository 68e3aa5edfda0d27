#pragma once

#include <cmath>
#include <span>
#include <string>

namespace nonconc {

// Norm on R^m for vector-valued Phi; the choice only moves constants.
enum class NormKind { max, euclidean };

std::string to_string(NormKind k);
NormKind parse_norm(const std::string& name);

inline double vector_norm(std::span<const double> v, NormKind norm) {
  double r = 0;
  if (norm == NormKind::max) {
    for (double x : v) r = std::max(r, std::abs(x));
  } else {
    for (double x : v) r += x * x;
    r = std::sqrt(r);
  }
  return r;
}

}  // namespace nonconc
