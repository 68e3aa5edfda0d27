#include "nonconc/gallery.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "nonconc/error.hpp"
#include "nonconc/parse.hpp"

namespace nonconc {

namespace {

Polynomial var(std::size_t nv, std::size_t i) { return Polynomial::variable(nv, i); }

Polynomial embed_into(const Polynomial& p, std::size_t nv, std::size_t offset) {
  std::vector<std::size_t> map(p.nvars());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = offset + i;
  return embed(p, nv, map);
}

PolyVector parse_curve(const std::vector<std::string>& exprs, const std::vector<std::string>& vars) {
  std::vector<Polynomial> comps;
  for (const auto& e : exprs) comps.push_back(parse_polynomial(e, vars));
  return PolyVector(std::move(comps));
}

void check_quadratic(const QuadraticForm& Q) {
  const std::size_t n = Q.size();
  require(n >= 1, "quadratic form needs n >= 1");
  for (const auto& slice : Q) {
    require(slice.size() == n, "quadratic form must be n x n x n");
    for (const auto& row : slice) require(row.size() == n, "quadratic form must be n x n x n");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        if (Q[i][j][l] != Q[i][l][j]) throw ValidationError("quadratic form must be symmetric in its two arguments");
}

}  // namespace

std::vector<std::vector<unsigned>> clifford_blades(unsigned l) {
  require(l >= 1, "clifford algebra needs l >= 1");
  require(l <= 4, "clifford matrices are limited to l <= 4");
  std::vector<std::vector<unsigned>> blades;
  for (unsigned mask = 0; mask < (1u << l); ++mask) {
    std::vector<unsigned> s;
    for (unsigned i = 0; i < l; ++i)
      if (mask & (1u << i)) s.push_back(i);
    blades.push_back(std::move(s));
  }
  std::sort(blades.begin(), blades.end());
  return blades;
}

std::vector<IntMatrix> clifford_matrices(unsigned l) {
  auto blades = clifford_blades(l);
  const std::size_t dim = blades.size();
  std::vector<IntMatrix> out;
  for (unsigned j = 0; j < l; ++j) {
    IntMatrix M(dim, std::vector<std::int64_t>(dim, 0));
    for (std::size_t col = 0; col < dim; ++col) {
      const auto& S = blades[col];
      // e_j e_S: move e_j past the generators of S below j, then either
      // cancel (e_j^2 = 1) or insert.
      auto below = static_cast<std::size_t>(std::count_if(S.begin(), S.end(), [&](unsigned i) { return i < j; }));
      std::vector<unsigned> T;
      std::set_symmetric_difference(S.begin(), S.end(), &j, &j + 1, std::back_inserter(T));
      std::size_t row = static_cast<std::size_t>(std::lower_bound(blades.begin(), blades.end(), T) - blades.begin());
      M[row][col] = below % 2 ? -1 : 1;
    }
    out.push_back(std::move(M));
  }
  return out;
}

PhiSpec phi_determinantal(std::size_t nprime) {
  require(nprime >= 1, "matrix size must be positive");
  const std::size_t n = nprime * nprime, nv = 2 * n;
  PolyMatrix m(nprime, std::vector<Polynomial>(nprime));
  for (std::size_t i = 0; i < nprime; ++i)
    for (std::size_t j = 0; j < nprime; ++j) m[i][j] = var(nv, i * nprime + j) - var(nv, n + i * nprime + j);
  return PhiSpec{n, 2, 0, PolyVector({det_poly_matrix(m)})};
}

PhiSpec phi_affine(const PolyVector& curve, std::size_t k) {
  require(curve.size() >= 1, "curve needs at least one coordinate");
  require(k == curve.size() + 1, "affine functional needs k = (curve dimension) + 1 slots");
  const std::size_t p = curve.nvars(), d = curve.size(), nv = k * p;
  // Column j holds curve(x_j) - curve(x_k).
  PolyMatrix m(d, std::vector<Polynomial>(d));
  for (std::size_t i = 0; i < d; ++i) {
    Polynomial last = embed_into(curve[i], nv, (k - 1) * p);
    for (std::size_t j = 0; j < d; ++j) m[i][j] = embed_into(curve[i], nv, j * p) - last;
  }
  return PhiSpec{p, k, 0, PolyVector({det_poly_matrix(m)})};
}

PhiSpec phi_quadratic(const QuadraticForm& Q) {
  check_quadratic(Q);
  const std::size_t n = Q.size(), nv = 2 * n;
  PolyMatrix m(n, std::vector<Polynomial>(n, Polynomial(nv)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        if (Q[i][j][l] != 0) m[i][j] += Q[i][j][l] * (var(nv, n + l) - var(nv, l));
  return PhiSpec{n, 2, 0, PolyVector({det_poly_matrix(m)})};
}

PhiSpec phi_hausdorff(const PolyVector& curve) {
  require(curve.size() >= 1, "curve needs at least one coordinate");
  const std::size_t p = curve.nvars(), nv = 2 * p;
  std::vector<Polynomial> comps;
  for (const auto& c : curve.components()) comps.push_back(embed_into(c, nv, 0) - embed_into(c, nv, p));
  return PhiSpec{p, 2, 0, PolyVector(std::move(comps))};
}

GammaSpec gamma_clifford(unsigned l, const PolyVector& curve) {
  auto M = clifford_matrices(l);
  require(curve.size() == l, "clifford family needs one curve coordinate per generator");
  const std::size_t n = curve.nvars(), dim = M.front().size(), N2 = 2 * dim, nv = n + N2;
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(var(nv, i));
  for (std::size_t row = 0; row < dim; ++row) {
    Polynomial c = var(nv, n + row);  // y
    for (unsigned j = 0; j < l; ++j) {
      Polynomial g = embed_into(curve[j], nv, 0);
      for (std::size_t col = 0; col < dim; ++col)
        if (M[j][row][col] != 0) c += Rational(M[j][row][col]) * g * var(nv, n + dim + col);
    }
    comps.push_back(std::move(c));
  }
  GammaSpec g{n, n + dim, N2, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

GammaSpec gamma_matrix(std::size_t nprime) {
  require(nprime >= 1, "matrix size must be positive");
  const std::size_t n = nprime * nprime, N2 = 2 * nprime, nv = n + N2;
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(var(nv, i));
  for (std::size_t i = 0; i < nprime; ++i) {
    Polynomial c = var(nv, n + i);
    for (std::size_t j = 0; j < nprime; ++j) c += var(nv, i * nprime + j) * var(nv, n + nprime + j);
    comps.push_back(std::move(c));
  }
  GammaSpec g{n, n + nprime, N2, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

GammaSpec gamma_quadratic(const QuadraticForm& Q) {
  check_quadratic(Q);
  const std::size_t n = Q.size(), N2 = 2 * n, nv = n + N2;
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(var(nv, i));
  std::vector<Polynomial> a;  // x - t
  for (std::size_t i = 0; i < n; ++i) a.push_back(var(nv, n + n + i) - var(nv, i));
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial c = var(nv, n + i);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        if (Q[i][j][l] != 0) c -= Q[i][j][l] * a[j] * a[l];
    comps.push_back(std::move(c));
  }
  GammaSpec g{n, 2 * n, N2, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

GammaSpec gamma_affine(const PolyVector& curve) {
  require(curve.size() >= 1, "curve needs at least one coordinate");
  const std::size_t n = curve.nvars(), d = curve.size(), N2 = d + 1, nv = n + N2;
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(var(nv, i));
  Polynomial c = var(nv, n);
  for (std::size_t j = 0; j < d; ++j) c += embed_into(curve[j], nv, 0) * var(nv, n + 1 + j);
  comps.push_back(std::move(c));
  GammaSpec g{n, n + 1, N2, PolyVector(std::move(comps))};
  g.validate();
  return g;
}

std::string to_string(Basis b) {
  switch (b) {
    case Basis::stated:
      return "stated";
    case Basis::derived:
      return "derived";
    case Basis::trivial:
      return "trivial";
  }
  return "?";
}

const ExpectedFact* GalleryEntry::fact(const std::string& key) const {
  for (const auto& f : facts)
    if (f.key == key) return &f;
  return nullptr;
}

namespace {

struct Builder {
  std::string name;
  std::function<GalleryEntry()> build;
};

std::string ratio(std::size_t a, unsigned b) {
  std::size_t g = std::gcd(a, static_cast<std::size_t>(b));
  return b / g == 1 ? std::to_string(a / g) : std::to_string(a / g) + "/" + std::to_string(b / g);
}

GalleryEntry make(std::string name, std::string description, std::string parameters, PhiSpec phi, unsigned q,
                  Basis q_basis, std::string q_note) {
  GalleryEntry e;
  e.name = std::move(name);
  e.description = std::move(description);
  e.parameters = std::move(parameters);
  e.phi = std::move(phi);
  e.q = q;
  e.facts.push_back({"q", std::to_string(q), q_basis, std::move(q_note)});
  e.facts.push_back({"sigma", ratio(e.phi.n, q), Basis::trivial, "n/q"});
  return e;
}

GalleryEntry with_gamma(GalleryEntry e, GammaSpec g) {
  e.gamma = std::move(g);
  e.facts.push_back({"s", ratio(e.q, static_cast<unsigned>(e.phi.n)), Basis::trivial, "q/n for the operator"});
  return e;
}

void density(GalleryEntry& e, std::string value, Basis b, std::string note) {
  e.facts.push_back({"density", std::move(value), b, std::move(note)});
}

const std::vector<Builder>& builders() {
  static const std::vector<Builder> list = {
      {"difference",
       [] {
         auto e = make("difference", "x - y on the line", "", phi_hausdorff(parse_curve({"t"}, {"t"})), 1,
                       Basis::stated, "Hausdorff example, order one");
         density(e, "1", Basis::derived, "one first derivative, scale invariant");
         e.facts.push_back({"S", "diameter", Basis::stated, "sup |x - y| over E^2"});
         return e;
       }},
      {"difference_plane",
       [] {
         auto e = make("difference_plane", "x - y in the plane", "",
                       phi_hausdorff(parse_curve({"u", "v"}, {"u", "v"})), 1, Basis::stated,
                       "Hausdorff example, order one");
         density(e, "positive", Basis::derived, "Lebesgue measure up to constants");
         return e;
       }},
      {"hausdorff_parabola",
       [] {
         auto e = make("hausdorff_parabola", "(t, t^2)(x) - (t, t^2)(y)", "curve (t, t^2)",
                       phi_hausdorff(parse_curve({"t", "t^2"}, {"t"})), 1, Basis::stated,
                       "curve differences vanish to order one");
         density(e, "positive", Basis::derived, "arc length, locally injective curve");
         return e;
       }},
      {"determinantal_2",
       [] {
         auto e = make("determinantal_2", "det(A_1 - A_2) on 2 x 2 matrices", "n' = 2", phi_determinantal(2), 2,
                       Basis::stated, "order equals the matrix size");
         density(e, "positive", Basis::stated, "comparable to Lebesgue measure");
         return with_gamma(std::move(e), gamma_matrix(2));
       }},
      {"determinantal_3",
       [] {
         auto e = make("determinantal_3", "det(A_1 - A_2) on 3 x 3 matrices", "n' = 3", phi_determinantal(3), 3,
                       Basis::stated, "order equals the matrix size");
         density(e, "positive", Basis::stated, "comparable to Lebesgue measure");
         return e;
       }},
      {"affine_parabola",
       [] {
         PolyVector curve = parse_curve({"t", "t^2"}, {"t"});
         auto e = make("affine_parabola", "det(c(x1) - c(x3), c(x2) - c(x3)) for c = (t, t^2)", "curve (t, t^2), k = 3",
                       phi_affine(curve, 3), 3, Basis::derived, "product of the three differences");
         density(e, "positive", Basis::derived, "nonzero cubic Vandermonde coefficient");
         return with_gamma(std::move(e), gamma_affine(curve));
       }},
      {"affine_cubic",
       [] {
         PolyVector curve = parse_curve({"t", "t^2", "t^3"}, {"t"});
         auto e = make("affine_cubic", "affine functional of the moment curve (t, t^2, t^3)", "k = 4",
                       phi_affine(curve, 4), 6, Basis::derived, "product of the six differences");
         density(e, "positive", Basis::derived, "Vandermonde product");
         return e;
       }},
      {"quadratic_identity_2",
       [] {
         QuadraticForm Q(2, std::vector<std::vector<Rational>>(2, std::vector<Rational>(2, Rational(0))));
         Q[0][0][0] = 1;
         Q[1][1][1] = 1;
         auto e = make("quadratic_identity_2", "det Q(., t2 - t1) for Q^i_{jl} = [i = j = l]", "n = 2",
                       phi_quadratic(Q), 2, Basis::stated, "degree exactly n");
         density(e, "positive", Basis::derived, "product a_1 a_2 is outside the nullcone");
         return with_gamma(std::move(e), gamma_quadratic(Q));
       }},
      {"clifford_1",
       [] {
         auto g = gamma_clifford(1, parse_curve({"t"}, {"t"}));
         auto e = make("clifford_1", "rotational family over the algebra with one generator", "l = 1, curve t",
                       build_phi_jacobian(g), 2, Basis::stated, "order 2^l");
         density(e, "positive", Basis::stated, "Hausdorff measure on the image of the curve");
         return with_gamma(std::move(e), std::move(g));
       }},
      {"clifford_2",
       [] {
         auto g = gamma_clifford(2, parse_curve({"u", "v"}, {"u", "v"}));
         auto e = make("clifford_2", "rotational family over the algebra with two generators",
                       "l = 2, curve (u, v)", build_phi_jacobian(g), 4, Basis::stated, "order 2^l");
         density(e, "positive", Basis::stated, "Hausdorff measure on the image of the curve");
         return with_gamma(std::move(e), std::move(g));
       }},
      {"line_family",
       [] {
         const std::vector<std::string> vars{"t", "x1", "x2"};
         GammaSpec g{1, 2, 2, parse_curve({"t", "x1 + t*x2"}, vars)};
         auto e = make("line_family", "lines (t, x1 + t x2) in the plane", "", build_phi_jacobian(g), 1,
                       Basis::derived, "Phi_x = t2 - t1 up to sign");
         density(e, "1", Basis::derived, "translation invariant, unit derivative");
         e.facts.push_back({"delta", "1/3", Basis::derived, "integral of |t1 - t2| over E^2 >= |E|^3 / 3"});
         return with_gamma(std::move(e), std::move(g));
       }},
      {"square_difference",
       [] {
         const std::vector<std::string> vars{"x1", "y1", "x2", "y2"};
         PhiSpec phi{2, 2, 0, parse_curve({"(x1 - x2)^2"}, vars)};
         auto e = make("square_difference", "(x1 - x2)^2 on the plane", "", std::move(phi), 2, Basis::trivial,
                       "a square of a linear form");
         density(e, "0", Basis::derived, "the y direction can be stretched for free");
         return e;
       }},
      {"mixed_order",
       [] {
         const std::vector<std::string> vars{"x1", "y1", "x2", "y2"};
         PhiSpec phi{2, 2, 0, parse_curve({"(x1 - x2)^2 + (y1 - y2)^3"}, vars)};
         auto e = make("mixed_order", "(x1 - x2)^2 + (y1 - y2)^3", "", std::move(phi), 2, Basis::trivial,
                       "lowest homogeneous part is the square");
         density(e, "0", Basis::derived, "order-two part ignores y; multisystem value positive only at s = 6/5");
         return e;
       }},
  };
  return list;
}

}  // namespace

std::vector<std::string> gallery_names() {
  std::vector<std::string> out;
  for (const auto& b : builders()) out.push_back(b.name);
  return out;
}

GalleryEntry gallery_entry(const std::string& name) {
  for (const auto& b : builders())
    if (b.name == name) {
      GalleryEntry e = b.build();
      e.phi.validate();
      return e;
    }
  throw ValidationError("unknown gallery entry: " + name);
}

std::vector<GalleryEntry> gallery() {
  std::vector<GalleryEntry> out;
  for (const auto& b : builders()) out.push_back(gallery_entry(b.name));
  return out;
}

}  // namespace nonconc
