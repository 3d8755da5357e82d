#include "hamla/dualspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hamla/errors.hpp"

namespace hamla {

namespace {

using Idx = std::size_t;

Idx at(int i) { return static_cast<Idx>(i); }

std::vector<std::string> total_names(const Chart& base, int rank, std::vector<std::string> fiber) {
  if (fiber.empty()) {
    for (int a = 0; a < rank; ++a) {
      std::string name = "xi" + std::to_string(a + 1);
      while (std::find(base.coordinates().begin(), base.coordinates().end(), name) != base.coordinates().end())
        name += "_";
      fiber.push_back(name);
    }
  }
  if (static_cast<int>(fiber.size()) != rank) throw ShapeError("need one fiber coordinate name per frame element");
  std::vector<std::string> names = base.coordinates();
  names.insert(names.end(), fiber.begin(), fiber.end());
  return names;
}

Jets embed(const Jets& jets, int total_dim, std::span<const int> map) {
  Jets out;
  out.reserve(jets.size());
  for (const Jet& j : jets) out.push_back(j.embedded(total_dim, map));
  return out;
}

std::vector<int> base_map(int n) {
  std::vector<int> m(at(n));
  std::iota(m.begin(), m.end(), 0);
  return m;
}

double max_abs(const Field& f, const Point& p) {
  double m = 0.0;
  for (const Jet& j : f.evaluate(p, 0)) m = std::max(m, std::abs(j.value()));
  return m;
}

double field_max(const std::vector<Field>& fields, const Point& p, int order) {
  double m = 0.0;
  for (const Field& f : fields) m = std::max(m, residual_at(f, p, order));
  return m;
}

ScalarField constant_scalar(const ChartPtr& chart, double v) {
  return ScalarField(Field::constant(chart, FieldKind::Scalar, {v}));
}

/// Coordinate functions and one product as base generators.
std::vector<ScalarField> base_generators(const ChartPtr& chart) {
  std::vector<ScalarField> fs;
  int n = chart->dim();
  for (int i = 0; i < n; ++i) fs.push_back(coordinate_function(chart, i));
  if (n > 0) {
    const auto& x = chart->coordinates();
    fs.push_back(scalar_field(chart, x[0] + "*" + x[at(n - 1)] + " + " + x[0]));
  }
  return fs;
}

/// Frame sections and nonconstant multiples of them.
std::vector<SectionA> section_generators(const LieAlgebroid& A) {
  std::vector<SectionA> as;
  int r = A.rank(), n = A.dim();
  for (int a = 0; a < r; ++a) as.push_back(A.frame(a));
  for (int a = 0; a < r && n > 0; ++a) {
    std::vector<std::string> comps(at(r), "0");
    comps[at(a)] = "1 + " + A.chart()->coordinates()[at(a % n)];
    as.push_back(A.section(comps));
  }
  return as;
}

/// Pi(Da, Db) evaluated on xi: Pi^{ij} l_{D_i a} l_{D_j b}.
ScalarField pi_of_covariants(const Connection& D, const TotalChart& T, const SectionA& a, const SectionA& b) {
  const BivectorField& pi = D.algebroid()->base()->pi();
  int n = D.dim();
  ScalarField sum = constant_scalar(T.chart(), 0.0);
  std::vector<ScalarField> la, lb;
  for (int i = 0; i < n; ++i) {
    VectorField di = coordinate_vector(D.chart(), i);
    la.push_back(T.fiber_linear(D.covariant(di, a)));
    lb.push_back(T.fiber_linear(D.covariant(di, b)));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      ScalarField pij = T.lift(ScalarField(pi.component(pair_index(n, i, j))));
      sum = sum + pij * (la[at(i)] * lb[at(j)] - la[at(j)] * lb[at(i)]);
    }
  return sum;
}

}  // namespace

TotalChart::TotalChart(ChartPtr base, int rank, std::vector<std::string> fiber_names)
    : base_(std::move(base)), rank_(rank) {
  if (!base_) throw ShapeError("total chart without base chart");
  if (rank < 0) throw ShapeError("negative rank");
  total_ = Chart::make(total_names(*base_, rank, std::move(fiber_names)));
}

Field TotalChart::lift(const Field& f) const {
  if (!(*f.chart() == *base_)) throw ShapeError("lift expects a field on the base chart");
  int n = base_dim(), N = dim();
  FieldKind kind = f.kind() == FieldKind::Scalar ? FieldKind::Scalar : FieldKind::Table;
  Field src = f;
  return Field(total_, kind, f.size(), f.depth(), [src, n, N](std::span<const double> p, int order) {
    auto map = base_map(n);
    return embed(src.evaluate(p.first(at(n)), order), N, map);
  });
}

ScalarField TotalChart::fiber_linear(const SectionA& a) const {
  if (!(*a.chart() == *base_)) throw ShapeError("fiber-linear function expects a section on the base chart");
  if (a.size() != at(rank_)) throw ShapeError("section rank does not match the total chart");
  int n = base_dim(), N = dim(), r = rank_;
  SectionA src = a;
  return ScalarField(Field(total_, FieldKind::Scalar, 1, a.depth(), [src, n, N, r](std::span<const double> p, int order) {
    auto map = base_map(n);
    Jets av = embed(src.evaluate(p.first(at(n)), order), N, map);
    Jet s = zero_jet(N, order);
    for (int g = 0; g < r; ++g) s += av[at(g)] * Jet::variable(N, order, n + g, p[at(n + g)]);
    return Jets{std::move(s)};
  }));
}

ScalarField TotalChart::fiber_coordinate(int a) const { return coordinate_function(total_, fiber_index(a)); }

Point TotalChart::point(const Point& x, const std::vector<double>& xi) const {
  if (static_cast<int>(x.size()) != base_dim() || static_cast<int>(xi.size()) != rank_)
    throw ShapeError("total-space point has the wrong shape");
  Point p = x;
  p.insert(p.end(), xi.begin(), xi.end());
  return p;
}

BivectorField build_Pi_A(const LieAlgebroid& A, const TotalChart& T) {
  if (!(*A.chart() == *T.base()) || A.rank() != T.rank()) throw ShapeError("total chart does not match the algebroid");
  int n = T.base_dim(), r = T.rank(), N = T.dim();
  Field rho = A.anchor_table(), c = A.structure_table();
  int depth = std::max(rho.depth(), c.depth());
  return BivectorField(Field(T.chart(), FieldKind::Bivector, pair_count(N), depth,
                             [rho, c, n, r, N](std::span<const double> p, int order) {
                               auto map = base_map(n);
                               auto base = p.first(at(n));
                               Jets R = embed(rho.evaluate(base, order), N, map);
                               Jets C = embed(c.evaluate(base, order), N, map);
                               Jets out(pair_count(N), zero_jet(N, order));
                               for (int i = 0; i < n; ++i)
                                 for (int a = 0; a < r; ++a) out[pair_index(N, i, n + a)] = -R[at(i * r + a)];
                               for (int a = 0; a < r; ++a)
                                 for (int b = a + 1; b < r; ++b) {
                                   Jet s = zero_jet(N, order);
                                   for (int g = 0; g < r; ++g)
                                     s += C[pair_index(r, a, b) * at(r) + at(g)] *
                                          Jet::variable(N, order, n + g, p[at(n + g)]);
                                   out[pair_index(N, n + a, n + b)] = std::move(s);
                                 }
                               return out;
                             }));
}

BivectorField build_Pi_hat(const Connection& D, const TotalChart& T) {
  if (!(*D.chart() == *T.base()) || D.rank() != T.rank()) throw ShapeError("total chart does not match the connection");
  int n = T.base_dim(), r = T.rank(), N = T.dim();
  Field pi = D.algebroid()->base()->pi(), G = D.coefficients();
  int depth = std::max(pi.depth(), G.depth());
  return BivectorField(Field(
      T.chart(), FieldKind::Bivector, pair_count(N), depth, [pi, G, n, r, N](std::span<const double> p, int order) {
        auto map = base_map(n);
        auto base = p.first(at(n));
        Jets P = embed(pi.evaluate(base, order), N, map);
        Jets Gm = embed(G.evaluate(base, order), N, map);
        Jets PM = bivector_matrix(P, n, N, order);
        // H[i * r + b] = Gamma^g_{ib} xi_g
        Jets H(at(n * r), zero_jet(N, order));
        for (int i = 0; i < n; ++i)
          for (int b = 0; b < r; ++b)
            for (int g = 0; g < r; ++g)
              H[at(i * r + b)] += Gm[Connection::index(r, i, g, b)] * Jet::variable(N, order, n + g, p[at(n + g)]);
        Jets out(pair_count(N), zero_jet(N, order));
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) out[pair_index(N, i, j)] = P[pair_index(n, i, j)];
        for (int i = 0; i < n; ++i)
          for (int b = 0; b < r; ++b) {
            Jet s = zero_jet(N, order);
            for (int j = 0; j < n; ++j) s += PM[at(i * n + j)] * H[at(j * r + b)];
            out[pair_index(N, i, n + b)] = std::move(s);
          }
        for (int a = 0; a < r; ++a)
          for (int b = a + 1; b < r; ++b) {
            Jet s = zero_jet(N, order);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) s += PM[at(i * n + j)] * H[at(i * r + a)] * H[at(j * r + b)];
            out[pair_index(N, n + a, n + b)] = std::move(s);
          }
        return out;
      }));
}

ScalarField C_trilinear(const BivectorField& Phi, const BivectorField& Psi, const ScalarField& F, const ScalarField& G,
                        const ScalarField& H) {
  auto term = [&](const ScalarField& a, const ScalarField& b, const ScalarField& c) {
    return poisson_bracket(Phi, a, poisson_bracket(Psi, b, c)) + poisson_bracket(Psi, a, poisson_bracket(Phi, b, c));
  };
  return term(F, G, H) + term(G, H, F) + term(H, F, G);
}

std::vector<std::vector<double>> fiber_grid(int rank, std::span<const double> nodes) {
  std::vector<std::vector<double>> grid{{}};
  for (int a = 0; a < rank; ++a) {
    std::vector<std::vector<double>> next;
    for (const auto& g : grid)
      for (double v : nodes) {
        auto h = g;
        h.push_back(v);
        next.push_back(std::move(h));
      }
    grid = std::move(next);
  }
  return grid;
}

CheckReport theorem41_check(const Connection& D, std::span<const Point> points, int order, double tol) {
  const LieAlgebroid& A = *D.algebroid();
  TotalChart T(A.chart(), A.rank());
  BivectorField pi_hat = build_Pi_hat(D, T);
  BivectorField pi_A = build_Pi_A(A, T);
  TrivectorField comm = schouten(pi_hat, pi_A);

  const BivectorField& pi = A.base()->pi();
  int n = A.dim(), r = A.rank();
  std::vector<Field> cond;
  for (int a = 0; a < r; ++a) cond.push_back(D.dcheck_pi(A.frame(a)));
  for (int k = 0; k < n; ++k) {
    VectorField v = -pi_sharp(pi, coordinate_differential(A.chart(), k));
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        SectionA ea = A.frame(a), eb = A.frame(b);
        cond.push_back(D.covariant_torsion(v, ea, eb) - D.curvature(v, A.anchor(ea), eb) +
                       D.curvature(v, A.anchor(eb), ea));
      }
  }

  auto grid = fiber_grid(r, kFiberNodes);
  CheckReport rep;
  rep.name = "theorem41";
  rep.tolerance = tol;
  double res_ii = 0.0;
  bool all_i = true, all_ii = true, agree = true;
  for (const Point& x : points) {
    double ri = 0.0, si = 1.0;
    for (const auto& xi : grid) {
      Point p = T.point(x, xi);
      ri = std::max(ri, residual_at(comm, p, order));
      si = std::max({si, max_abs(pi_hat, p), max_abs(pi_A, p)});
    }
    double rii = field_max(cond, x, order);
    double sii = std::max({1.0, max_abs(pi, x), max_abs(A.anchor_table(), x), max_abs(A.structure_table(), x),
                           max_abs(D.coefficients(), x)});
    bool vi = ri <= tol * si, vii = rii <= tol * sii;
    all_i = all_i && vi;
    all_ii = all_ii && vii;
    agree = agree && vi == vii;
    res_ii = std::max(res_ii, rii);
    rep.add(x, ri, si);
  }
  rep.finalize();
  rep.metrics["residual_i"] = rep.max_residual;
  rep.metrics["residual_ii"] = res_ii;
  rep.metrics["verdict_i"] = all_i;
  rep.metrics["verdict_ii"] = all_ii;
  rep.metrics["verdict_agreement"] = agree;
  rep.metrics["fiber_grid_points"] = static_cast<double>(grid.size());
  if (!agree) rep.notes.push_back("verdicts (i) and (ii) disagree at some point");
  return rep;
}

CheckReport bivector_map_residual(const HamiltonianInstance& inst) {
  inst.validate_shapes();
  const LieAlgebroid& A = *inst.A;
  const Connection& D = inst.D;
  const BivectorField& pi = A.base()->pi();
  const ChartPtr& chart = A.chart();
  int n = A.dim(), r = A.rank();

  std::vector<Field> vh, vv;
  std::vector<ScalarField> mu_a;
  for (int a = 0; a < r; ++a) mu_a.push_back(A.pairing(inst.mu, A.frame(a)));
  for (int a = 0; a < r; ++a) {
    SectionA ea = A.frame(a);
    for (int k = 0; k < n; ++k) {
      ScalarField f = coordinate_function(chart, k);
      VectorField Xf = hamiltonian_vf(pi, f);
      vh.push_back(A.pairing(inst.mu, D.covariant(Xf, ea)) + directional(A.anchor(ea), f) -
                   poisson_bracket(pi, mu_a[at(a)], f));
    }
    for (int b = a + 1; b < r; ++b) {
      SectionA eb = A.frame(b);
      // Pi^{ij} <mu, D_i a> <mu, D_j b>
      std::vector<ScalarField> da, db;
      for (int i = 0; i < n; ++i) {
        VectorField di = coordinate_vector(chart, i);
        da.push_back(A.pairing(inst.mu, D.covariant(di, ea)));
        db.push_back(A.pairing(inst.mu, D.covariant(di, eb)));
      }
      ScalarField s = A.pairing(inst.mu, A.bracket(ea, eb)) - poisson_bracket(pi, mu_a[at(a)], mu_a[at(b)]);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          ScalarField pij(pi.component(pair_index(n, i, j)));
          s = s + pij * (da[at(i)] * db[at(j)] - da[at(j)] * db[at(i)]);
        }
      vv.push_back(s);
    }
  }

  // (HH) on the total space at (x, mu(x)).
  TotalChart T(chart, r);
  BivectorField sum = BivectorField(add(build_Pi_hat(D, T), build_Pi_A(A, T)));
  std::vector<Field> hh;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      hh.push_back(poisson_bracket(sum, coordinate_function(T.chart(), i), coordinate_function(T.chart(), j)) -
                   T.lift(ScalarField(pi.component(pair_index(n, i, j)))));

  CheckReport rep;
  rep.name = "bivector_map";
  rep.tolerance = inst.tol;
  rep.seed = inst.seed;
  double hh_max = 0.0, vh_max = 0.0, vv_max = 0.0;
  for (const Point& x : inst.points) {
    std::vector<double> xi = inst.mu.values(x, inst.order);
    double h = field_max(hh, T.point(x, xi), inst.order);
    double v1 = field_max(vh, x, inst.order);
    double v2 = field_max(vv, x, inst.order);
    hh_max = std::max(hh_max, h);
    vh_max = std::max(vh_max, v1);
    vv_max = std::max(vv_max, v2);
    rep.add(x, std::max(v1, v2), input_scale(inst, x));
  }
  rep.finalize();
  CheckReport h1 = check_H1(inst), h2 = check_H2(inst), h3 = check_H3(inst);
  rep.metrics["HH"] = hh_max;
  rep.metrics["VH"] = vh_max;
  rep.metrics["VV"] = vv_max;
  rep.metrics["h1_pass"] = h1.pass;
  rep.metrics["hamiltonian"] = h2.pass && h3.pass;
  rep.metrics["verdict_agreement"] = rep.pass == (h2.pass && h3.pass);
  if (!h1.pass) rep.notes.push_back("connection is not Poisson anchored; equivalence not guaranteed");
  if (rep.pass != (h2.pass && h3.pass)) rep.notes.push_back("bivector-map verdict disagrees with H2 and H3");
  return rep;
}

CheckReport pi_A_bracket_check(const LieAlgebroid& A, std::span<const Point> total_points, int order, double tol) {
  TotalChart T(A.chart(), A.rank());
  BivectorField PA = build_Pi_A(A, T);
  auto fs = base_generators(A.chart());
  auto as = section_generators(A);
  std::vector<Field> res;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j) res.push_back(poisson_bracket(PA, T.lift(fs[i]), T.lift(fs[j])));
  for (const auto& a : as) {
    ScalarField la = T.fiber_linear(a);
    for (const auto& f : fs)
      res.push_back(poisson_bracket(PA, la, T.lift(f)) - T.lift(directional(A.anchor(a), f)));
    for (const auto& b : as) res.push_back(poisson_bracket(PA, la, T.fiber_linear(b)) - T.fiber_linear(A.bracket(a, b)));
  }
  CheckReport rep;
  rep.name = "pi_A_brackets";
  rep.tolerance = tol;
  for (const Point& p : total_points) rep.add(p, field_max(res, p, order), std::max(1.0, max_abs(PA, p)));
  rep.finalize();
  return rep;
}

CheckReport pi_hat_bracket_check(const Connection& D, std::span<const Point> total_points, int order, double tol) {
  const LieAlgebroid& A = *D.algebroid();
  const BivectorField& pi = A.base()->pi();
  TotalChart T(A.chart(), A.rank());
  BivectorField PH = build_Pi_hat(D, T);
  auto fs = base_generators(A.chart());
  auto as = section_generators(A);
  std::vector<Field> res;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j)
      res.push_back(poisson_bracket(PH, T.lift(fs[i]), T.lift(fs[j])) - T.lift(poisson_bracket(pi, fs[i], fs[j])));
  for (std::size_t x = 0; x < as.size(); ++x) {
    ScalarField la = T.fiber_linear(as[x]);
    for (const auto& f : fs)
      res.push_back(poisson_bracket(PH, la, T.lift(f)) - T.fiber_linear(D.covariant(hamiltonian_vf(pi, f), as[x])));
    for (std::size_t y = x + 1; y < as.size(); ++y)
      res.push_back(poisson_bracket(PH, la, T.fiber_linear(as[y])) - pi_of_covariants(D, T, as[x], as[y]));
  }
  CheckReport rep;
  rep.name = "pi_hat_brackets";
  rep.tolerance = tol;
  for (const Point& p : total_points) rep.add(p, field_max(res, p, order), std::max(1.0, max_abs(PH, p)));
  rep.finalize();
  return rep;
}

std::vector<Point> total_space_points(std::span<const Point> base_points, int rank, double lo, double hi,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  for (const Point& x : base_points) {
    Point p = x;
    for (int a = 0; a < rank; ++a) p.push_back(uniform(rng, lo, hi));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace hamla
