#include <gtest/gtest.h>

#include <random>

#include "hamla/dualspace.hpp"
#include "hamla/errors.hpp"
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

AlgebroidPtr so3_action(const ChartPtr& c) {
  std::vector<VectorField> gen{vector_field(c, {"0", "z", "-y"}), vector_field(c, {"-z", "0", "x"}),
                               vector_field(c, {"y", "-x", "0"})};
  return make_action_algebroid(so3_base(c), StructureConstants::so3(), gen, sampled(3));
}

AlgebroidPtr abelian_action(const ChartPtr& c, const PoissonChartPtr& P, std::vector<std::string> v) {
  return make_action_algebroid(P, StructureConstants::abelian(1), {vector_field(c, v)}, sampled(c->dim()));
}

std::vector<Point> total_points(const LieAlgebroid& A, std::size_t count, std::uint64_t seed) {
  return total_space_points(points(A.dim(), count, seed), A.rank(), -1, 1, seed + 1);
}

}  // namespace

TEST(TotalChart, NamesAndLifts) {
  auto c = Chart::make({"x", "y"});
  TotalChart T(c, 2);
  EXPECT_EQ(T.dim(), 4);
  EXPECT_EQ(T.fiber_index(1), 3);
  auto f = T.lift(scalar_field(c, "x*y"));
  auto p = T.point({2, 3}, {5, 7});
  EXPECT_EQ(val(f, p), 6.0);
  EXPECT_EQ(val(T.fiber_coordinate(1), p), 7.0);
  EXPECT_THROW(TotalChart(c, 1, {"x"}), ShapeError);
}

TEST(PiA, Examples) {
  auto c = Chart::make({"x", "y"});
  auto base = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto ab = make_lie_algebra_bundle(base, 2, Field::zero(c, FieldKind::Table, 2), sampled(2));
  TotalChart Ta(c, 2);
  for (const auto& p : total_points(*ab, 5, 1)) EXPECT_EQ(max_abs(build_Pi_A(*ab, Ta), p), 0.0);

  // pure Lie algebra: a one-point-like base with no anchor
  auto t = Chart::make({"t"});
  auto tb = PoissonChart::make(bivector_from_upper(t, {}));
  auto so3 = make_lie_algebra_bundle(tb, 3, Field::constant(t, FieldKind::Table, StructureConstants::so3().upper()),
                                     sampled(1));
  TotalChart Ts(t, 3);
  auto PA = build_Pi_A(*so3, Ts);
  auto xi = [&](int a) { return Ts.fiber_coordinate(a); };
  for (const auto& p : total_points(*so3, 10, 2)) {
    EXPECT_NEAR(val(poisson_bracket(PA, xi(0), xi(1)), p), p[3], 1e-15);
    EXPECT_NEAR(val(poisson_bracket(PA, xi(1), xi(2)), p), p[1], 1e-15);
    EXPECT_NEAR(val(poisson_bracket(PA, xi(2), xi(0)), p), p[2], 1e-15);
  }

  auto T2 = make_tangent_algebroid(base);
  TotalChart Tt(c, 2);
  auto PT = build_Pi_A(*T2, Tt);
  for (const auto& p : total_points(*T2, 5, 3))
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        EXPECT_EQ(val(poisson_bracket(PT, Tt.fiber_coordinate(i), coordinate_function(Tt.chart(), j)), p),
                  i == j ? 1.0 : 0.0);
}

TEST(PiHat, Examples) {
  auto c = xyz();
  auto A = so3_action(c);
  TotalChart T(c, 3);
  auto H = build_Pi_hat(Connection::trivial(A), T);
  auto x = [&](int i) { return coordinate_function(T.chart(), i); };
  for (const auto& p : total_points(*A, 10, 4)) {
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 6; ++j) EXPECT_EQ(val(poisson_bracket(H, T.fiber_coordinate(a), x(j)), p), 0.0);
    EXPECT_EQ(val(poisson_bracket(H, x(0), x(1)), p), p[2]);
  }
  auto zero = PoissonChart::make(bivector_from_upper(c, {"0", "0", "0"}));
  auto Z = make_cotangent_algebroid(zero, sampled(3));
  std::mt19937_64 rng(5);
  auto D = Connection::from_strings(Z, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
  for (const auto& p : total_points(*Z, 5, 5)) EXPECT_EQ(max_abs(build_Pi_hat(D, T), p), 0.0);
}

TEST(BracketIdentities, FlatRankOneBundle) {
  auto c = Chart::make({"x", "y"});
  auto base = PoissonChart::make(bivector_from_upper(c, {"1 + x^2"}));
  auto A = make_lie_algebra_bundle(base, 1, Field::zero(c, FieldKind::Table, 0), sampled(2));
  // Gamma = d(xy), flat
  auto D = Connection::from_strings(A, {"y", "x"});
  EXPECT_EQ(max_abs(D.curvature(coordinate_vector(c, 0), coordinate_vector(c, 1), A->frame(0)), {0.3, 0.4}), 0.0);
  auto rep = pi_hat_bracket_check(D, total_points(*A, 50, 6));
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_residual, 1e-9);
}

TEST(BracketIdentities, RandomInstances) {
  std::mt19937_64 rng(51);
  auto c = xyz();
  std::vector<AlgebroidPtr> algebroids{so3_action(c), make_cotangent_algebroid(so3_base(c), sampled(3)),
                                       make_tangent_algebroid(so3_base(c))};
  for (const auto& A : algebroids) {
    EXPECT_LE(pi_A_bracket_check(*A, total_points(*A, 50, 7)).max_residual, 1e-9);
    for (int k = 0; k < 2; ++k) {
      auto D = Connection::from_strings(A, random_connection_table(rng, *c, A->rank(), {1, 3, 1.0}));
      EXPECT_LE(pi_hat_bracket_check(D, total_points(*A, 50, 8 + k)).max_residual, 1e-9);
    }
  }
}

TEST(CTrilinear, AntisymmetricDerivationAndSchouten) {
  std::mt19937_64 rng(52);
  auto c = xyz();
  auto A = make_cotangent_algebroid(so3_base(c), sampled(3));
  TotalChart T(c, 3);
  auto D = Connection::from_strings(A, random_connection_table(rng, *c, 3, {1, 2, 1.0}));
  auto Phi = build_Pi_hat(D, T);
  auto Psi = build_Pi_A(*A, T);
  auto names = T.chart()->coordinates();
  auto rnd = [&] { return scalar_field(T.chart(), random_polynomial(rng, names, {2, 3, 1.0})); };
  for (int k = 0; k < 5; ++k) {
    auto F = rnd(), F2 = rnd(), G = rnd(), H = rnd();
    auto C = C_trilinear(Phi, Psi, F, G, H);
    auto swapped = C_trilinear(Phi, Psi, G, F, H);
    auto rotated = C_trilinear(Phi, Psi, G, H, F);
    auto prod = C_trilinear(Phi, Psi, F * F2, G, H);
    auto leib = F * C_trilinear(Phi, Psi, F2, G, H) + F2 * C;
    auto sch = apply(schouten(Phi, Psi), d(F), d(G), d(H));
    for (const auto& p : total_points(*A, 5, 20 + k)) {
      double v = val(C, p);
      EXPECT_NEAR(val(swapped, p), -v, 1e-9);
      EXPECT_NEAR(val(rotated, p), v, 1e-9);
      EXPECT_NEAR(val(prod, p), val(leib, p), 1e-9 * std::max(1.0, std::abs(v)));
      EXPECT_NEAR(val(sch, p), v, 1e-9 * std::max(1.0, std::abs(v)));
    }
  }
}

TEST(CTrilinear, Examples) {
  auto c = Chart::make({"x", "y"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  TotalChart T1(c, 0);
  auto Pl = bivector_from_upper(T1.chart(), {"1"});
  auto f = scalar_field(T1.chart(), "sin(x)*y"), g = scalar_field(T1.chart(), "x^2"), h = scalar_field(T1.chart(), "y");
  EXPECT_EQ(val(C_trilinear(Pl, Pl, f, g, h), {0.3, 0.2}), 0.0);

  auto c3 = xyz();
  auto A = so3_action(c3);
  TotalChart T(c3, 3);
  auto Phi = build_Pi_hat(Connection::trivial(A), T);
  auto Psi = build_Pi_A(*A, T);
  auto x = [&](int i) { return T.lift(coordinate_function(c3, i)); };
  for (const auto& p : total_points(*A, 10, 30))
    for (int a = 0; a < 3; ++a)
      EXPECT_LE(std::abs(val(C_trilinear(Phi, Psi, x(0), x(1), T.fiber_linear(A->frame(a))), p)), 1e-12);

  // x d_x: C(f, g, l_e) = (D^_e Pi)(df, dg)
  auto B = abelian_action(c, P, {"x", "0"});
  TotalChart Tb(c, 1);
  auto D = Connection::trivial(B);
  auto Phb = build_Pi_hat(D, Tb);
  auto Psb = build_Pi_A(*B, Tb);
  auto fx = scalar_field(c, "x*y"), gx = scalar_field(c, "y^2 + x");
  auto lhs = C_trilinear(Phb, Psb, Tb.lift(fx), Tb.lift(gx), Tb.fiber_linear(B->frame(0)));
  auto rhs = Tb.lift(apply(D.dcheck_pi(B->frame(0)), d(fx), d(gx)));
  for (const auto& p : total_points(*B, 10, 31)) {
    EXPECT_NEAR(val(lhs, p), val(rhs, p), 1e-12);
    EXPECT_GT(std::abs(val(rhs, p)), 1e-3);
  }
}

TEST(DualCompatibility, Examples) {
  auto c3 = xyz();
  auto so3 = theorem41_check(Connection::trivial(so3_action(c3)), points(3, 10, 1));
  EXPECT_TRUE(so3.pass);
  EXPECT_EQ(so3.metrics.at("residual_ii"), 0.0);
  EXPECT_EQ(so3.metrics.at("verdict_agreement"), 1.0);
  EXPECT_EQ(so3.metrics.at("fiber_grid_points"), 64.0);

  auto c = Chart::make({"x", "y"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto xdx = theorem41_check(Connection::trivial(abelian_action(c, P, {"x", "0"})),
                             sample_box(SampleBox{{1.0, -1.0}, {2.0, 1.0}}, 10, 2));
  EXPECT_FALSE(xdx.pass);
  EXPECT_GT(xdx.metrics.at("residual_ii"), 0.5);
  EXPECT_EQ(xdx.metrics.at("verdict_agreement"), 1.0);

  std::mt19937_64 rng(53);
  auto so3c = Field::constant(c, FieldKind::Table, StructureConstants::so3().upper());
  auto Bd = make_lie_algebra_bundle(P, 3, so3c, sampled(2));
  for (int k = 0; k < 3; ++k) {
    auto D = Connection::from_strings(Bd, random_connection_table(rng, *c, 3, {1, 2, 1.0}));
    EXPECT_EQ(theorem41_check(D, points(2, 5, 40 + k)).metrics.at("verdict_agreement"), 1.0);
  }
}

TEST(DualCompatibility, TrivialActionCommutesIffPoissonAction) {
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  std::vector<std::pair<std::vector<std::string>, bool>> cases{
      {{"1", "0"}, true},        {{"0", "1"}, true},        {{"p", "-q"}, true},
      {{"q", "-p"}, true},       {{"2*p", "0"}, true},      {{"q", "0"}, false},
      {{"q + p", "0"}, false},   {{"0", "p"}, false},       {{"q", "p"}, false},
      {{"q^2", "0"}, false}};
  auto pts = points(2, 10, 3, 0.5, 1.5);
  for (const auto& [v, poisson] : cases) {
    auto A = abelian_action(c, P, v);
    bool lie = max_abs(lie_derivative(vector_field(c, v), P->pi()), pts[0]) <= 1e-12;
    ASSERT_EQ(lie, poisson) << v[0] << "," << v[1];
    auto rep = theorem41_check(Connection::trivial(A), pts);
    EXPECT_EQ(rep.pass, poisson) << v[0] << "," << v[1];
    EXPECT_EQ(rep.metrics.at("verdict_agreement"), 1.0);
  }
}

TEST(BivectorMap, Examples) {
  auto c = xyz();
  auto A = so3_action(c);
  auto so3 = bivector_map_residual(instance(A, Connection::trivial(A), A->dual_section({"x", "y", "z"}), points(3, 10, 1)));
  EXPECT_TRUE(so3.pass);
  EXPECT_EQ(so3.metrics.at("verdict_agreement"), 1.0);
  EXPECT_LE(std::max({so3.metrics.at("HH"), so3.metrics.at("VH"), so3.metrics.at("VV")}), 1e-12);

  auto Z = make_cotangent_algebroid(PoissonChart::make(bivector_from_upper(c, {"1", "0", "0"})), sampled(3));
  auto z = bivector_map_residual(instance(Z, Connection::trivial(Z), Z->dual_section({"-x", "-y", "0"}), points(3, 10, 2)));
  EXPECT_FALSE(z.pass);
  EXPECT_LE(z.metrics.at("VH"), 1e-12);
  EXPECT_GT(z.metrics.at("VV"), 0.5);
  EXPECT_EQ(z.metrics.at("verdict_agreement"), 1.0);

  auto c2 = Chart::make({"x", "y"});
  auto B = make_lie_algebra_bundle(PoissonChart::make(bivector_from_upper(c2, {"1"})), 3,
                                   Field::constant(c2, FieldKind::Table, StructureConstants::so3().upper()), sampled(2));
  std::mt19937_64 rng(54);
  auto D = Connection::from_strings(B, random_connection_table(rng, *c2, 3, {1, 2, 1.0}));
  auto b = bivector_map_residual(instance(B, D, B->dual_section({"0", "0", "0"}), points(2, 10, 3)));
  EXPECT_TRUE(b.pass);
  EXPECT_EQ(b.max_residual, 0.0);
}

// For a Poisson action with the trivial connection, Pi^ + Pi_A reproduces
// {f, g}_Pi, rho a . f and [a, b] on generators.
TEST(SumBracket, PoissonActionTable) {
  auto c = xyz();
  auto A = so3_action(c);
  TotalChart T(c, 3);
  auto sum = BivectorField(add(build_Pi_hat(Connection::trivial(A), T), build_Pi_A(*A, T)));
  auto f = scalar_field(c, "x*y + z"), g = scalar_field(c, "sin(x)");
  const auto& pi = A->base()->pi();
  for (const auto& p : total_points(*A, 10, 60)) {
    EXPECT_NEAR(val(poisson_bracket(sum, T.lift(f), T.lift(g)), p), val(T.lift(poisson_bracket(pi, f, g)), p), 1e-14);
    for (int a = 0; a < 3; ++a) {
      auto la = T.fiber_linear(A->frame(a));
      EXPECT_NEAR(val(poisson_bracket(sum, la, T.lift(f)), p), val(T.lift(directional(A->anchor(A->frame(a)), f)), p),
                  1e-14);
      for (int b = 0; b < 3; ++b)
        EXPECT_NEAR(val(poisson_bracket(sum, la, T.fiber_linear(A->frame(b))), p),
                    val(T.fiber_linear(A->bracket(A->frame(a), A->frame(b))), p), 1e-14);
    }
  }
}
