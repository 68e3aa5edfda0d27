#include "nonconc/simplex.hpp"

#include <algorithm>
#include <optional>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

class Tableau {
public:
  // rows: constraint rows [A | b]; objective row holds reduced costs of a
  // maximisation (we keep z - c.x form: entry j is -c_j initially).
  Tableau(RationalMatrix rows, std::vector<std::size_t> basis, std::size_t ncols)
      : rows_(std::move(rows)), basis_(std::move(basis)), ncols_(ncols) {}

  void set_objective(const std::vector<Rational>& c) {
    obj_.assign(ncols_ + 1, Rational(0));
    for (std::size_t j = 0; j < ncols_; ++j) obj_[j] = -c[j];
    // Price out basic columns.
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Rational f = obj_[basis_[r]];
      if (sgn(f) == 0) continue;
      for (std::size_t j = 0; j <= ncols_; ++j) obj_[j] -= f * rows_[r][j];
    }
  }

  // Returns false when unbounded. Columns >= `allowed` never enter.
  bool optimise(std::size_t allowed) {
    while (true) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed; ++j)
        if (sgn(obj_[j]) < 0) {
          enter = j;
          break;
        }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best_ratio;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const Rational& a = rows_[r][*enter];
        if (sgn(a) <= 0) continue;
        Rational ratio = rows_[r][ncols_] / a;
        if (!leave || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[*leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const Rational p = rows_[r][c];
    for (auto& v : rows_[r]) v /= p;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r || sgn(rows_[i][c]) == 0) continue;
      const Rational f = rows_[i][c];
      for (std::size_t j = 0; j <= ncols_; ++j) rows_[i][j] -= f * rows_[r][j];
    }
    if (sgn(obj_[c]) != 0) {
      const Rational f = obj_[c];
      for (std::size_t j = 0; j <= ncols_; ++j) obj_[j] -= f * rows_[r][j];
    }
    basis_[r] = c;
  }

  Rational value() const { return obj_[ncols_]; }
  std::vector<Rational> solution(std::size_t nvars) const {
    std::vector<Rational> x(nvars, Rational(0));
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (basis_[r] < nvars) x[basis_[r]] = rows_[r][ncols_];
    return x;
  }

  // Removes artificial columns (index >= first_art) from the basis after
  // phase one; rows that cannot pivot out are redundant and dropped.
  void expel_artificials(std::size_t first_art) {
    for (std::size_t r = 0; r < rows_.size();) {
      if (basis_[r] < first_art) {
        ++r;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_art; ++j)
        if (sgn(rows_[r][j]) != 0) {
          col = j;
          break;
        }
      if (col) {
        pivot(r, *col);
        ++r;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
      }
    }
  }

private:
  RationalMatrix rows_;
  std::vector<std::size_t> basis_;
  std::size_t ncols_;
  std::vector<Rational> obj_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.A.size();
  const std::size_t n = lp.c.size();
  require(lp.b.size() == m, "solve_lp: b must have one entry per row");
  for (const auto& row : lp.A) require(row.size() == n, "solve_lp: A rows must match c");

  // Phase one: artificial variable per row, columns n .. n+m-1.
  const std::size_t ncols = n + m;
  RationalMatrix rows(m, std::vector<Rational>(ncols + 1, Rational(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    const bool flip = sgn(lp.b[r]) < 0;
    for (std::size_t j = 0; j < n; ++j) rows[r][j] = flip ? Rational(-lp.A[r][j]) : lp.A[r][j];
    rows[r][n + r] = 1;
    rows[r][ncols] = flip ? Rational(-lp.b[r]) : lp.b[r];
    basis[r] = n + r;
  }
  Tableau t(std::move(rows), std::move(basis), ncols);
  std::vector<Rational> phase1(ncols, Rational(0));
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = -1;
  t.set_objective(phase1);
  t.optimise(ncols);
  LpResult result;
  if (sgn(t.value()) != 0) {
    result.status = LpStatus::infeasible;
    return result;
  }
  t.expel_artificials(n);
  std::vector<Rational> phase2(ncols, Rational(0));
  std::copy(lp.c.begin(), lp.c.end(), phase2.begin());
  t.set_objective(phase2);
  if (!t.optimise(n)) {
    result.status = LpStatus::unbounded;
    return result;
  }
  result.status = LpStatus::optimal;
  result.x = t.solution(n);
  result.value = 0;
  for (std::size_t j = 0; j < n; ++j) result.value += lp.c[j] * result.x[j];
  return result;
}

HullMembership hull_membership(std::span<const std::vector<Rational>> points, std::span<const Rational> target) {
  require(!points.empty(), "hull_membership: empty point set");
  const std::size_t d = target.size();
  const std::size_t m = points.size();
  for (const auto& p : points) require(p.size() == d, "hull_membership: dimension mismatch");

  HullMembership out;
  // Weights: theta >= 0, sum theta = 1, sum theta_a p_a = target.
  {
    LinearProgram lp;
    lp.A.assign(d + 1, std::vector<Rational>(m, Rational(0)));
    lp.b.assign(d + 1, Rational(0));
    lp.c.assign(m, Rational(0));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t i = 0; i < d; ++i) lp.A[i][a] = points[a][i];
      lp.A[d][a] = 1;
    }
    for (std::size_t i = 0; i < d; ++i) lp.b[i] = target[i];
    lp.b[d] = 1;
    LpResult res = solve_lp(lp);
    if (res.status == LpStatus::optimal) {
      out.member = true;
      out.weights = std::move(res.x);
      return out;
    }
  }

  // Separation: maximise s subject to l.(p_a - t) >= s, |l_i| <= 1, and
  // sum l = 0 when every point shares the target's coordinate sum.
  Rational tsum = 0;
  for (const auto& v : target) tsum += v;
  bool same_sum = true;
  for (const auto& p : points) {
    Rational s = 0;
    for (const auto& v : p) s += v;
    same_sum = same_sum && s == tsum;
  }
  // Columns: l+ (d), l- (d), s+, s-, slack (m), cap+ (d), cap- (d).
  const std::size_t lp0 = 0, lm0 = d, sp = 2 * d, sm = 2 * d + 1, sl0 = 2 * d + 2, cp0 = sl0 + m, cm0 = cp0 + d;
  const std::size_t ncols = cm0 + d;
  LinearProgram lp;
  lp.c.assign(ncols, Rational(0));
  lp.c[sp] = 1;
  lp.c[sm] = -1;
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<Rational> row(ncols, Rational(0));
    for (std::size_t i = 0; i < d; ++i) {
      Rational diff = points[a][i] - target[i];
      row[lp0 + i] = diff;
      row[lm0 + i] = -diff;
    }
    row[sp] = -1;
    row[sm] = 1;
    row[sl0 + a] = -1;
    lp.A.push_back(std::move(row));
    lp.b.push_back(0);
  }
  if (same_sum) {
    std::vector<Rational> row(ncols, Rational(0));
    for (std::size_t i = 0; i < d; ++i) {
      row[lp0 + i] = 1;
      row[lm0 + i] = -1;
    }
    lp.A.push_back(std::move(row));
    lp.b.push_back(0);
  }
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Rational> up(ncols, Rational(0)), down(ncols, Rational(0));
    up[lp0 + i] = 1;
    up[cp0 + i] = 1;
    down[lm0 + i] = 1;
    down[cm0 + i] = 1;
    lp.A.push_back(std::move(up));
    lp.b.push_back(1);
    lp.A.push_back(std::move(down));
    lp.b.push_back(1);
  }
  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::optimal || sgn(res.value) <= 0)
    throw DomainError("hull_membership: point outside hull but no separating vector found");
  out.member = false;
  out.separator.resize(d);
  Rational maxabs = 0;
  for (std::size_t i = 0; i < d; ++i) {
    out.separator[i] = res.x[lp0 + i] - res.x[lm0 + i];
    maxabs = std::max(maxabs, Rational(abs(out.separator[i])));
  }
  for (auto& v : out.separator) v /= maxabs;
  out.margin = res.value / maxabs;
  return out;
}

}  // namespace nonconc
