#include <gtest/gtest.h>

#include <random>

#include "hamla/errors.hpp"
#include "hamla/hamiltonian.hpp"
#include "hamla/random.hpp"
#include "support.hpp"

using namespace hamla;
using namespace hamla::test;

namespace {

Validation sampled(int dim) { return {points(dim, 20, 1), kOrder, 1e-9}; }

HamiltonianInstance instance(AlgebroidPtr A, Connection D, SectionAStar mu, std::vector<Point> pts) {
  return HamiltonianInstance{std::move(A), std::move(D), std::move(mu), {}, {}, std::move(pts), kOrder, 1e-9, 0};
}

ChartPtr xyz() { return Chart::make({"x", "y", "z"}); }
PoissonChartPtr so3_base(const ChartPtr& c) { return PoissonChart::make(bivector_from_upper(c, {"z", "-y", "x"})); }
PoissonChartPtr plane_base(const ChartPtr& c) { return PoissonChart::make(bivector_from_upper(c, {"1", "0", "0"})); }

std::vector<VectorField> coadjoint(const ChartPtr& c) {
  return {vector_field(c, {"0", "z", "-y"}), vector_field(c, {"-z", "0", "x"}), vector_field(c, {"y", "-x", "0"})};
}

HamiltonianInstance so3_cotangent(std::vector<std::string> mu) {
  auto c = xyz();
  auto A = make_cotangent_algebroid(so3_base(c), sampled(3));
  return instance(A, Connection::trivial(A), A->dual_section(mu), points(3, 20, 2));
}

HamiltonianInstance so3_action() {
  auto c = xyz();
  auto A = make_action_algebroid(so3_base(c), StructureConstants::so3(), coadjoint(c), sampled(3));
  return instance(A, Connection::trivial(A), A->dual_section({"x", "y", "z"}), points(3, 20, 3));
}

HamiltonianInstance zeromu(std::vector<std::string> mu = {"-x", "-y", "0"}) {
  auto c = xyz();
  auto A = make_cotangent_algebroid(plane_base(c), sampled(3));
  return instance(A, Connection::trivial(A), A->dual_section(mu), points(3, 20, 4));
}

HamiltonianInstance so3_bundle(std::mt19937_64& rng) {
  auto c = Chart::make({"x", "y"});
  auto base = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto so3 = Field::constant(c, FieldKind::Table, StructureConstants::so3().upper());
  auto A = make_lie_algebra_bundle(base, 3, so3, sampled(2));
  auto D = Connection::from_strings(A, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
  return instance(A, D, A->dual_section({"0", "0", "0"}), points(2, 20, 5));
}

HamiltonianInstance x_dx_action() {
  auto c = Chart::make({"x", "y"});
  auto base = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto A = make_action_algebroid(base, StructureConstants::abelian(1), {vector_field(c, {"x", "0"})}, sampled(2));
  return instance(A, Connection::trivial(A), A->dual_section({"0"}),
                  sample_box(SampleBox{{1.0, -1.0}, {2.0, 1.0}}, 20, 6));
}

}  // namespace

TEST(H1, Examples) {
  EXPECT_TRUE(check_H1(so3_action()).pass);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(check_H1(so3_bundle(rng)).pass);
  auto bad = check_H1(x_dx_action());
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.max_residual, 1.0, 1e-12);
  EXPECT_EQ(bad.points.size(), 20u);
}

TEST(H2, Examples) {
  EXPECT_TRUE(check_H2(zeromu()).pass);
  EXPECT_TRUE(check_H2(zeromu({"-x", "-y", "-1"})).pass);
  EXPECT_TRUE(check_H2(so3_cotangent({"-x", "-y", "-z"})).pass);
  // mu = +x on the cotangent frame fails with residual 2|x|
  auto wrong = so3_cotangent({"x", "y", "z"});
  auto rep = check_H2(wrong);
  EXPECT_FALSE(rep.pass);
  for (std::size_t k = 0; k < rep.points.size(); ++k) {
    const auto& p = rep.points[k];
    double inf = 0;
    for (double v : p) inf = std::max(inf, std::abs(v));
    EXPECT_LE(rep.residuals[k], 2 * inf + 1e-12);
  }
  // mu = 0 with an identity anchor
  auto c = Chart::make({"q", "p"});
  auto T = make_tangent_algebroid(PoissonChart::make(bivector_from_upper(c, {"1"})));
  EXPECT_FALSE(check_H2(instance(T, Connection::trivial(T), T->dual_section({"0", "0"}), points(2, 5, 1))).pass);
}

TEST(H3, Examples) {
  auto so3 = check_H3(so3_cotangent({"-x", "-y", "-z"}));
  EXPECT_TRUE(so3.pass);
  EXPECT_EQ(so3.metrics.at("h2_pass"), 1.0);
  EXPECT_TRUE(check_H3(so3_action()).pass);

  auto z = check_H3(zeromu());
  EXPECT_FALSE(z.pass);
  EXPECT_NEAR(z.max_residual, 1.0, 1e-12);
  EXPECT_LE(z.metrics.at("form_gap"), 1e-9);

  std::mt19937_64 rng(42);
  EXPECT_TRUE(check_H3(so3_bundle(rng)).pass);

  auto pre = check_H3(so3_cotangent({"x", "y", "z"}));
  EXPECT_EQ(pre.metrics.at("h2_pass"), 0.0);
  EXPECT_FALSE(pre.notes.empty());
}

TEST(H3Property, FormsAgreeWhereH2Holds) {
  std::mt19937_64 rng(43);
  std::vector<HamiltonianInstance> cases{so3_cotangent({"-x", "-y", "-z"}), so3_action(), zeromu(),
                                         zeromu({"-x", "-y", "-1"})};
  auto c = Chart::make({"x", "y"});
  for (int k = 0; k < 5; ++k) {
    // bundles over Pi = 0 with random D and mu; H2 holds because both sides vanish
    auto base = PoissonChart::make(bivector_from_upper(c, {"0"}));
    auto so3 = Field::constant(c, FieldKind::Table, StructureConstants::so3().upper());
    auto A = make_lie_algebra_bundle(base, 3, so3, sampled(2));
    auto D = Connection::from_strings(A, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
    std::vector<std::string> mu;
    for (int a = 0; a < 3; ++a) mu.push_back(random_polynomial(rng, c->coordinates(), {2, 3, 1.0}));
    cases.push_back(instance(A, D, A->dual_section(mu), points(2, 20, 50 + k)));
  }
  for (const auto& inst : cases) {
    ASSERT_TRUE(check_H2(inst).pass);
    EXPECT_LE(check_H3(inst).metrics.at("form_gap"), 1e-9);
  }
}

TEST(Liouville, Examples) {
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto eta = one_form(c, {"0", "q + 1"});
  auto mu = pi_sharp(P->pi(), eta);
  auto rep = liouville_residual(P, mu, eta, points(2, 20, 1));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_residual, 0.0);
  EXPECT_EQ(rep.metrics.at("eta_residual"), 0.0);
  EXPECT_EQ(rep.metrics.at("verdict_agreement"), 1.0);

  // R^4 Darboux: eta = q1 dp1 + q2 dp2 + dp1
  auto c4 = Chart::make({"q1", "q2", "p1", "p2"});
  auto P4 = PoissonChart::make(bivector_from_upper(c4, {"0", "1", "0", "0", "1", "0"}));
  auto eta4 = one_form(c4, {"0", "0", "q1 + 1", "q2"});
  auto rep4 = liouville_residual(P4, pi_sharp(P4->pi(), eta4), eta4, points(4, 20, 2));
  EXPECT_EQ(rep4.max_residual, 0.0);
  EXPECT_EQ(rep4.metrics.at("eta_residual"), 0.0);

  auto c3 = xyz();
  auto z = liouville_residual(plane_base(c3), vector_field(c3, {"-x", "-y", "0"}), std::nullopt, points(3, 20, 3));
  EXPECT_FALSE(z.pass);
  EXPECT_NEAR(z.max_residual, 1.0, 1e-12);

  auto zero = PoissonChart::make(bivector_from_upper(c3, {"0", "0", "0"}));
  EXPECT_TRUE(liouville_residual(zero, vector_field(c3, {"x*y", "sin(z)", "1"}), std::nullopt, points(3, 5, 4)).pass);
}

TEST(Liouville, CriteriaAgreeOnRandomOneForms) {
  std::mt19937_64 rng(44);
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  for (int k = 0; k < 10; ++k) {
    auto eta = random_one_form(rng, c, {2, 3, 1.0});
    auto rep = liouville_residual(P, pi_sharp(P->pi(), eta), eta, points(2, 10, 60 + k));
    EXPECT_EQ(rep.metrics.at("verdict_agreement"), 1.0);
  }
}

namespace {

void expect_momentum_postconditions(const PoissonChartPtr& P, const Connection& D, const OneForm& eta,
                                    const std::vector<Point>& pts) {
  MomentumConnectionOptions opt;
  opt.points = pts;
  Connection Dp = build_momentum_connection(P, D, eta, std::nullopt, opt);
  auto A = Dp.algebroid();
  auto mu = as_dual_section(pi_sharp(P->pi(), eta));
  auto inst = instance(A, Dp, mu, pts);
  EXPECT_LE(check_H2(inst).max_residual, 1e-8);
  EXPECT_TRUE(check_H1(inst).pass);
  int n = P->dim();
  auto c = P->chart();
  for (const auto& p : pts) {
    auto delta = Dp.coefficients().values(p, kOrder);
    auto base = D.coefficients().values(p, kOrder);
    for (int i = 0; i < n; ++i)
      for (int g = 0; g < n; ++g)
        for (int b = 0; b < n; ++b) {
          double dig = delta[Connection::index(n, i, g, b)] - base[Connection::index(n, i, g, b)];
          double dgi = delta[Connection::index(n, g, i, b)] - base[Connection::index(n, g, i, b)];
          EXPECT_NEAR(dig, dgi, 1e-12);
        }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        auto vi = coordinate_vector(c, i), vj = coordinate_vector(c, j);
        EXPECT_LE(max_diff(Dp.dual().torsion_TM(vi, vj), D.dual().torsion_TM(vi, vj), p), 1e-10);
      }
  }
}

}  // namespace

TEST(MomentumConnection, Examples) {
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto A = make_cotangent_algebroid(P, sampled(2));
  auto D = Connection::trivial(A);
  auto eta = one_form(c, {"0", "q + 1"});
  auto pts = sample_box(SampleBox{{-0.5, -1.0}, {0.5, 1.0}}, 20, 7);
  EXPECT_FALSE(check_H2(instance(A, D, as_dual_section(pi_sharp(P->pi(), eta)), pts)).pass);
  expect_momentum_postconditions(P, D, eta, pts);

  auto c3 = xyz();
  auto P3 = plane_base(c3);
  auto A3 = make_cotangent_algebroid(P3, sampled(3));
  expect_momentum_postconditions(P3, Connection::trivial(A3), one_form(c3, {"0", "1", "0"}), points(3, 20, 8));

  // mu = Pi# (q dp) vanishes on q = 0
  std::vector<Point> with_zero = pts;
  with_zero.push_back({0.0, 0.3});
  try {
    MomentumConnectionOptions opt;
    opt.points = with_zero;
    build_momentum_connection(P, D, one_form(c, {"0", "q"}), std::nullopt, opt);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(e.point(), (Point{0.0, 0.3}));
  }
}

TEST(MomentumConnection, RandomTorsionFreeDarboux) {
  std::mt19937_64 rng(45);
  for (int k = 0; k < 4; ++k) {
    bool four = k % 2;
    auto c = four ? Chart::make({"q1", "q2", "p1", "p2"}) : Chart::make({"q", "p"});
    int n = c->dim();
    auto P = PoissonChart::make(four ? bivector_from_upper(c, {"0", "1", "0", "0", "1", "0"})
                                     : bivector_from_upper(c, {"1"}));
    auto T = make_tangent_algebroid(P);
    auto A = make_cotangent_algebroid(P, sampled(n));
    // constant symmetric TM connection, so its dual is Poisson anchored
    auto sym = Connection::from_strings(T, random_symmetric_table(rng, *c, {0, 1, 0.5}));
    auto D = Connection(A, sym.dual().coefficients());
    std::vector<std::string> e(static_cast<std::size_t>(n), "0");
    e[static_cast<std::size_t>(n / 2)] = "1 + " + random_polynomial(rng, c->coordinates(), {1, 2, 0.05});
    expect_momentum_postconditions(P, D, one_form(c, e), points(n, 10, 70 + k, -0.5, 0.5));
  }
}

TEST(HorizontalSection, Examples) {
  auto c = xyz();
  auto A = make_cotangent_algebroid(so3_base(c), sampled(3));
  Point m{0.2, -0.1, 0.4};
  auto a = horizontal_section_at(Connection::trivial(A), m, {1, 2, 3});
  EXPECT_EQ(vals(a, {0.9, 0.9, -0.9}), (std::vector<double>{1, 2, 3}));
  std::mt19937_64 rng(46);
  for (int k = 0; k < 10; ++k) {
    auto D = Connection::from_strings(A, random_connection_table(rng, *c, 3, {2, 3, 1.0}));
    auto mm = points(3, 1, 80 + k)[0];
    std::vector<double> value{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    auto s = horizontal_section_at(D, mm, value);
    for (int i = 0; i < 3; ++i) EXPECT_LE(max_abs(D.covariant(coordinate_vector(c, i), s), mm), 1e-12);
    EXPECT_EQ(max_abs(horizontal_section_at(D, mm, {0, 0, 0}), {0.5, 0.5, 0.5}), 0.0);
  }
}

TEST(Pointwise, Examples) {
  auto so3 = so3_cotangent({"-x", "-y", "-z"});
  for (const auto& m : points(3, 5, 9)) {
    auto r = pointwise_at(so3, m);
    EXPECT_LE(std::max({r.p1, r.p2, r.p3}), 1e-12);
    EXPECT_LE(r.horizontality, 1e-12);
  }
  EXPECT_TRUE(pointwise_checks(so3_action(), points(3, 10, 10)).pass);
  auto bad = x_dx_action();
  auto r = pointwise_at(bad, {1.5, 0.0});
  EXPECT_NEAR(r.p1, 1.0, 1e-12);
  EXPECT_NEAR(r.h1, 1.0, 1e-12);
  EXPECT_TRUE(pointwise_checks(bad, bad.points).pass);
}

TEST(PointwiseProperty, VerdictsMatchTensorialChecks) {
  std::mt19937_64 rng(47);
  std::vector<HamiltonianInstance> cases{so3_cotangent({"-x", "-y", "-z"}), so3_cotangent({"x", "y", "z"}), so3_action(),
                                         zeromu(), x_dx_action()};
  for (int k = 0; k < 3; ++k) cases.push_back(so3_bundle(rng));
  auto c = xyz();
  auto A = make_cotangent_algebroid(so3_base(c), sampled(3));
  for (int k = 0; k < 3; ++k) {
    auto D = Connection::from_strings(A, random_connection_table(rng, *c, 3, {1, 3, 0.5}));
    cases.push_back(instance(A, D, A->dual_section({"-x", "-y", "-z"}), points(3, 20, 90 + k)));
  }
  for (const auto& inst : cases) {
    auto rep = pointwise_checks(inst, points(inst.A->dim(), 20, 11));
    EXPECT_TRUE(rep.pass) << rep.max_residual;
    EXPECT_EQ(rep.max_residual, 0.0);
  }
}

TEST(Invariance, Examples) {
  EXPECT_LE(invariance_residual(so3_cotangent({"-x", "-y", "-z"})).max_residual, 1e-9);
  EXPECT_LE(invariance_residual(so3_action()).max_residual, 1e-9);
  std::mt19937_64 rng(48);
  EXPECT_EQ(invariance_residual(so3_bundle(rng)).max_residual, 0.0);
  EXPECT_GT(invariance_residual(zeromu()).max_residual, 0.1);
}

TEST(Coisotropy, Examples) {
  auto so3 = check_H2(so3_cotangent({"-x", "-y", "-z"}));
  ASSERT_TRUE(so3.pass);
  auto w = coisotropy_witness(so3_cotangent({"-x", "-y", "-z"}), {0, 0, 0});
  EXPECT_TRUE(w.pass);
  EXPECT_EQ(w.metrics.at("dim_anchor_span"), 0.0);

  auto z = coisotropy_witness(zeromu(), {0, 0, 1});
  EXPECT_TRUE(z.pass);
  EXPECT_EQ(z.metrics.at("dim_anchor_span"), 2.0);
  EXPECT_EQ(z.metrics.at("dim_pi_sharp_span"), 2.0);
  EXPECT_LE(z.metrics.at("max_principal_angle"), 1e-9);

  EXPECT_THROW(coisotropy_witness(zeromu(), {0.5, 0, 1}), PreconditionError);
}

TEST(SymplecticSuite, Examples) {
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto T = make_tangent_algebroid(P);
  auto D = Connection::trivial(T);
  auto pts = points(2, 10, 12);

  auto one = symplectic_suite(P, D, vector_field(c, {"-q", "0"}), pts);
  EXPECT_TRUE(one.pass);
  auto both = symplectic_suite(P, D, vector_field(c, {"-q", "-p"}), pts);
  EXPECT_TRUE(both.pass);
  EXPECT_LE(both.metrics.at("dcheck_identity_residual"), 1e-9);

  auto degenerate = PoissonChart::make(bivector_from_upper(c, {"q"}));
  auto Td = make_tangent_algebroid(degenerate);
  std::vector<Point> at_zero{{0.0, 0.2}};
  EXPECT_THROW(symplectic_suite(degenerate, Connection::trivial(Td), vector_field(c, {"-q", "-p"}), at_zero),
               PreconditionError);
}

TEST(SymplecticSuite, RandomConnectionsAgree) {
  std::mt19937_64 rng(49);
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1 + q^2 + p^2"}));
  auto T = make_tangent_algebroid(P);
  for (int k = 0; k < 5; ++k) {
    auto D = Connection::from_strings(T, random_symmetric_table(rng, *c, {1, 2, 0.5}));
    auto n = random_vector_field(rng, c, {2, 3, 1.0});
    auto rep = symplectic_suite(P, D, n, points(2, 10, 100 + k));
    EXPECT_TRUE(rep.pass) << rep.max_residual;
    EXPECT_LE(rep.metrics.at("dcheck_identity_residual"), 1e-9);
  }
}

TEST(InverseTwoForm, InvertsPi) {
  auto c = Chart::make({"q", "p", "u", "v"});
  auto pi = bivector_from_upper(c, {"1 + q^2", "0", "0", "0", "0", "1 + u*v"});
  auto omega = inverse_two_form(pi);
  for (const auto& p : points(4, 10, 13, -0.5, 0.5))
    for (int i = 0; i < 4; ++i) {
      // omega_{ij} Pi^{jk} = delta
      auto row = pi_sharp(pi, OneForm(Field(stack(c, FieldKind::OneForm, {
                                       apply(omega, coordinate_vector(c, i), coordinate_vector(c, 0)),
                                       apply(omega, coordinate_vector(c, i), coordinate_vector(c, 1)),
                                       apply(omega, coordinate_vector(c, i), coordinate_vector(c, 2)),
                                       apply(omega, coordinate_vector(c, i), coordinate_vector(c, 3))}))));
      auto got = vals(row, p);
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(got[static_cast<std::size_t>(k)], i == k ? 1.0 : 0.0, 1e-12);
    }
}

TEST(ClassifyConnection, Examples) {
  auto c = xyz();
  auto pts = points(3, 10, 14);
  auto T = make_tangent_algebroid(plane_base(c));
  auto f = classify_flags(plane_base(c), Connection::trivial(T), pts);
  EXPECT_TRUE(f.torsion_free && f.d_pi && f.dcheck_pi && f.cotangent_torsion_free);

  auto S = make_tangent_algebroid(so3_base(c));
  auto g = classify_flags(so3_base(c), Connection::trivial(S), pts);
  EXPECT_TRUE(g.torsion_free);
  EXPECT_FALSE(g.d_pi);
  EXPECT_TRUE(classify_connection(so3_base(c), Connection::trivial(S), pts).pass);

  std::mt19937_64 rng(50);
  for (int k = 0; k < 5; ++k) {
    auto D = Connection::from_strings(S, random_symmetric_table(rng, *c, {2, 3, 1.0}));
    auto h = classify_flags(so3_base(c), D, pts);
    EXPECT_EQ(h.dcheck_pi_residual, h.d_pi_residual);
    EXPECT_TRUE(classify_connection(so3_base(c), D, pts).pass);
    auto A = make_cotangent_algebroid(so3_base(c), sampled(3));
    auto E = Connection::from_strings(A, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
    auto rep = classify_connection(so3_base(c), E, pts);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.metrics.count("torsion_on_leaves_residual"));
  }
}
