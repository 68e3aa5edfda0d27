#include "nonconc/jet.hpp"

#include <algorithm>
#include <unordered_map>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

using Acc = std::unordered_map<Monomial, double, MonomialHash>;

FloatPoly finish(std::size_t nvars, const Acc& acc) {
  FloatPoly out;
  out.nvars = nvars;
  out.terms.reserve(acc.size());
  for (const auto& [m, c] : acc)
    if (c != 0.0) out.terms.push_back({m, c});
  // Hash order is not reproducible across libraries; fix a canonical order so
  // downstream floating-point sums are deterministic.
  std::sort(out.terms.begin(), out.terms.end(), [](const auto& a, const auto& b) { return a.m > b.m; });
  return out;
}

bool within_cap(const Monomial& m, std::size_t n, std::size_t k, unsigned cap) {
  if (cap == kNoDegreeCap) return true;
  for (std::size_t j = 0; j < k; ++j) {
    unsigned d = 0;
    for (std::size_t i = 0; i < n; ++i) d += m[j * n + i];
    if (d > cap) return false;
  }
  return true;
}

}  // namespace

FloatPoly FloatPoly::from(const Polynomial& p) {
  FloatPoly out;
  out.nvars = p.nvars();
  out.terms.reserve(p.size());
  for (const auto& [m, c] : p.terms()) out.terms.push_back({m, to_double(c)});
  return out;
}

std::vector<unsigned> block_degrees(const Monomial& m, std::size_t n, std::size_t k) {
  std::vector<unsigned> d(k, 0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) d[j] += m[j * n + i];
  return d;
}

std::vector<unsigned> block_sum(const Monomial& m, std::size_t n, std::size_t k) {
  std::vector<unsigned> s(n, 0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) s[i] += m[j * n + i];
  return s;
}

FloatPoly mul_truncated(const FloatPoly& a, const FloatPoly& b, std::size_t n, std::size_t k, unsigned cap) {
  require(a.nvars == b.nvars, "mul_truncated: variable-count mismatch");
  Acc acc;
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      Monomial m = ta.m * tb.m;
      if (!within_cap(m, n, k, cap)) continue;
      acc[m] += ta.c * tb.c;
    }
  return finish(a.nvars, acc);
}

FloatPoly compose_blocks(const FloatPoly& p, const Eigen::MatrixXd& M, std::size_t n, std::size_t k) {
  require(static_cast<std::size_t>(M.rows()) == n && static_cast<std::size_t>(M.cols()) == n,
          "compose_blocks: M must be n x n");
  require(p.nvars >= n * k, "compose_blocks: polynomial has fewer than k*n variables");
  Acc acc;
  std::vector<std::pair<Monomial, double>> cur, next;
  for (const auto& t : p.terms) {
    cur.assign(1, {Monomial{}, t.c});
    for (std::size_t v = 0; v < n * k; ++v) {
      const std::size_t block = v / n, row = v % n;
      for (unsigned e = 0; e < t.m[v]; ++e) {
        next.clear();
        for (const auto& [m, c] : cur)
          for (std::size_t l = 0; l < n; ++l) {
            double w = M(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(l));
            if (w == 0.0) continue;
            Monomial mm = m;
            mm.set(block * n + l, mm[block * n + l] + 1);
            next.emplace_back(mm, c * w);
          }
        // Merge duplicates to keep the expansion from growing as n^degree.
        Acc merged;
        for (const auto& [m, c] : next) merged[m] += c;
        cur.assign(merged.begin(), merged.end());
      }
    }
    for (const auto& [m, c] : cur) {
      Monomial full = m;
      for (std::size_t v = n * k; v < p.nvars; ++v) full.set(v, t.m[v]);
      acc[full] += c;
    }
  }
  return finish(p.nvars, acc);
}

FloatPoly compose_truncated(const FloatPoly& p, std::span<const FloatPoly> subs, std::size_t n, std::size_t k,
                            unsigned cap) {
  require(subs.size() == p.nvars, "compose_truncated: need one substitute per variable");
  const std::size_t out_n = subs.empty() ? 0 : subs[0].nvars;
  std::vector<std::vector<FloatPoly>> powers(subs.size());
  auto power = [&](std::size_t v, unsigned e) -> const FloatPoly& {
    auto& cache = powers[v];
    if (cache.empty()) {
      FloatPoly one;
      one.nvars = out_n;
      one.terms.push_back({Monomial{}, 1.0});
      cache.push_back(std::move(one));
    }
    while (cache.size() <= e) cache.push_back(mul_truncated(cache.back(), subs[v], n, k, cap));
    return cache[e];
  };
  Acc acc;
  for (const auto& t : p.terms) {
    FloatPoly prod;
    prod.nvars = out_n;
    prod.terms.push_back({Monomial{}, t.c});
    for (std::size_t v = 0; v < p.nvars && !prod.terms.empty(); ++v)
      if (t.m[v]) prod = mul_truncated(prod, power(v, t.m[v]), n, k, cap);
    for (const auto& pt : prod.terms) acc[pt.m] += pt.c;
  }
  return finish(out_n, acc);
}

}  // namespace nonconc
