// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hamla/dualspace.hpp"
#include "hamla/errors.hpp"
#include "hamla/random.hpp"
#include "hamla/scenario.hpp"

using namespace hamla;

namespace {

constexpr int kOrder = 2;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Point> box(int dim, std::size_t count, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return sample_box(SampleBox::cube(dim, lo, hi), count, seed);
}

Validation sampled(int dim) { return {box(dim, 20, 1), kOrder, 1e-9}; }

HamiltonianInstance instance(AlgebroidPtr A, Connection D, SectionAStar mu, std::vector<Point> pts) {
  return HamiltonianInstance{std::move(A), std::move(D), std::move(mu), {}, {}, std::move(pts), kOrder, 1e-9, 0};
}

double value_at(const Field& f, const Point& p) { return f.values(p, kOrder).at(0); }

Scenario gallery_scenario(const std::string& name) {
  const auto* g = find_gallery(name);
  if (!g) throw ConfigurationError("no gallery scenario " + name);
  return parse_scenario(g->toml, name);
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---- 1
Outcome gallery_fidelity() {
  Outcome o;
  auto so3 = gallery_scenario("so3_liepoisson");
  double worst = 0.0;
  for (const char* h : {"H1", "H2", "H3"}) {
    auto r = run_check(so3, h);
    o.require(r.pass, std::string("so3_liepoisson ") + h + " failed");
    worst = std::max(worst, r.max_residual);
  }
  o.require(so3.points.size() >= 25, "so3_liepoisson samples fewer than 25 points");
  o.require(worst <= 1e-9, "so3_liepoisson residual " + fmt(worst));

  auto zm = gallery_scenario("zeromu");
  o.require(run_check(zm, "H1").pass && run_check(zm, "H2").pass, "zeromu H1/H2 failed");
  auto h3 = run_check(zm, "H3");
  double pi_norm = 1.0;
  o.require(!h3.pass && std::abs(h3.max_residual - pi_norm) <= 1e-9, "zeromu H3 residual " + fmt(h3.max_residual));

  o.require(run_check(gallery_scenario("zeromu_shifted"), "H2").pass, "zeromu_shifted H2 failed");

  double slowest = 0.0;
  for (const auto& g : gallery()) {
    auto t0 = Clock::now();
    auto rep = run_checks(parse_scenario(g.toml, g.name));
    double dt = seconds_since(t0);
    slowest = std::max(slowest, dt);
    o.require(exit_code(rep) == 0, g.name + " expectations not met");
    o.require(dt <= 5.0, g.name + " took " + fmt(dt) + " s");
  }
  if (o.pass)
    o.detail << "so3 max residual " << fmt(worst) << ", zeromu H3 " << fmt(h3.max_residual) << ", slowest scenario "
             << fmt(slowest) << " s";
  return o;
}

// ---- 2
Outcome identity_suite() {
  Outcome o;
  std::mt19937_64 rng(2001);
  auto xyz = Chart::make({"x", "y", "z"});
  auto xy = Chart::make({"x", "y"});
  std::vector<PoissonChartPtr> bases{PoissonChart::make(bivector_from_upper(xyz, {"z", "-y", "x"})),
                                     PoissonChart::make(bivector_from_upper(xyz, {"1", "0", "0"})),
                                     PoissonChart::make(bivector_from_upper(xy, {"1 + x^2 + y^2"}))};
  double ddpi = 0.0, dual = 0.0;
  std::size_t evaluations = 0;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    const auto& P = bases[b];
    auto c = P->chart();
    int n = c->dim();
    const auto& pi = P->pi();
    auto A = make_cotangent_algebroid(P, sampled(n));
    for (int k = 0; k < 10; ++k) {
      auto D = Connection::from_strings(A, random_connection_table(rng, *c, n, {1, 3, 1.0}));
      auto Dt = D.dual();
      std::vector<ScalarField> lhs_minus_rhs;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          auto al = coordinate_differential(c, i), be = coordinate_differential(c, j);
          auto T = Dt.torsion_TM(pi_sharp(pi, al), pi_sharp(pi, be));
          auto TA = D.torsion_TstarM(al, be);
          for (int g = 0; g < n; ++g) {
            auto ga = coordinate_differential(c, g);
            lhs_minus_rhs.push_back(apply(D.dcheck_pi(as_section(ga)), al, be) + pairing(ga, T));
            auto v = coordinate_vector(c, g);
            auto rhs = apply(Dt.covariant(v, pi), al, be) + pairing(be, Dt.torsion_TM(pi_sharp(pi, al), v)) -
                       pairing(al, Dt.torsion_TM(pi_sharp(pi, be), v));
            lhs_minus_rhs.push_back(pairing(TA, v) - rhs);
          }
        }
      for (const auto& p : box(n, 20, 3000 + 100 * b + k)) {
        for (std::size_t f = 0; f < lhs_minus_rhs.size(); ++f) {
          double r = std::abs(value_at(lhs_minus_rhs[f], p));
          (f % 2 == 0 ? ddpi : dual) = std::max(f % 2 == 0 ? ddpi : dual, r);
        }
        ++evaluations;
      }
    }
  }
  o.require(ddpi <= 1e-9, "dcheck-torsion residual " + fmt(ddpi));
  o.require(dual <= 1e-9, "dual torsion residual " + fmt(dual));
  if (o.pass)
    o.detail << evaluations << " point evaluations, residuals " << fmt(ddpi) << " and " << fmt(dual);
  return o;
}

// Momentum-connection instances on Darboux charts, shared by 3 and 5.
struct MomentumCase {
  PoissonChartPtr P;
  Connection D;
  Connection Dp;
  OneForm eta;
  std::vector<Point> points;
};

std::vector<MomentumCase> momentum_cases(int count) {
  std::mt19937_64 rng(2005);
  std::vector<MomentumCase> out;
  for (int k = 0; k < count; ++k) {
    bool four = k % 2 == 1;
    auto c = four ? Chart::make({"q1", "q2", "p1", "p2"}) : Chart::make({"q", "p"});
    int n = c->dim();
    auto P = PoissonChart::make(four ? bivector_from_upper(c, {"0", "1", "0", "0", "1", "0"})
                                     : bivector_from_upper(c, {"1"}));
    auto T = make_tangent_algebroid(P);
    auto A = make_cotangent_algebroid(P, sampled(n));
    auto sym = Connection::from_strings(T, random_symmetric_table(rng, *c, {1, 2, 0.5}));
    auto D = Connection(A, sym.dual().coefficients());
    std::vector<std::string> e(static_cast<std::size_t>(n), "0");
    e[static_cast<std::size_t>(n / 2)] = "1 + " + random_polynomial(rng, c->coordinates(), {1, 2, 0.05});
    for (int i = 0; i < n; ++i)
      if (i != n / 2) e[static_cast<std::size_t>(i)] = random_polynomial(rng, c->coordinates(), {1, 2, 0.3});
    auto eta = one_form(c, e);
    auto pts = box(n, 10, 5000 + k, -0.5, 0.5);
    MomentumConnectionOptions opt;
    opt.points = pts;
    auto Dp = build_momentum_connection(P, D, eta, std::nullopt, opt);
    out.push_back({P, D, Dp, eta, pts});
  }
  return out;
}

HamiltonianInstance momentum_instance(const MomentumCase& m) {
  return instance(m.Dp.algebroid(), m.Dp, as_dual_section(pi_sharp(m.P->pi(), m.eta)), m.points);
}

// ---- 3
Outcome h3_equivalence() {
  Outcome o;
  double gap = 0.0;
  int counted = 0;
  for (const auto& g : gallery()) {
    auto s = parse_scenario(g.toml, g.name);
    if (!s.algebroid) continue;
    auto r = run_check(s, "H3");
    if (r.metrics.at("h2_pass") != 1.0) continue;
    ++counted;
    gap = std::max(gap, r.metrics.at("form_gap"));
    o.require(r.metrics.at("form_gap") <= 1e-9, g.name + " form gap " + fmt(r.metrics.at("form_gap")));
  }
  std::mt19937_64 rng(2003);
  auto c = Chart::make({"x", "y"});
  auto base = PoissonChart::make(bivector_from_upper(c, {"0"}));
  auto so3 = Field::constant(c, FieldKind::Table, StructureConstants::so3().upper());
  auto B = make_lie_algebra_bundle(base, 3, so3, sampled(2));
  std::vector<HamiltonianInstance> random;
  for (int k = 0; k < 5; ++k) {
    auto D = Connection::from_strings(B, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
    std::vector<std::string> mu;
    for (int a = 0; a < 3; ++a) mu.push_back(random_polynomial(rng, c->coordinates(), {2, 3, 1.0}));
    random.push_back(instance(B, D, B->dual_section(mu), box(2, 20, 3100 + k)));
  }
  for (const auto& m : momentum_cases(5)) random.push_back(momentum_instance(m));
  for (std::size_t k = 0; k < random.size(); ++k) {
    if (!check_H2(random[k]).pass) {
      o.require(false, "random instance " + std::to_string(k) + " fails H2");
      continue;
    }
    ++counted;
    auto r = check_H3(random[k]);
    gap = std::max(gap, r.metrics.at("form_gap"));
    o.require(r.metrics.at("form_gap") <= 1e-9, "random instance " + std::to_string(k) + " form gap " +
                                                     fmt(r.metrics.at("form_gap")));
  }
  if (o.pass) o.detail << counted << " instances with H2, max form gap " << fmt(gap);
  return o;
}

// ---- 4
Outcome pointwise_equivalence() {
  Outcome o;
  int counted = 0;
  for (const auto& g : gallery()) {
    auto s = parse_scenario(g.toml, g.name);
    if (!s.algebroid) continue;
    s.pointwise_points = 20;
    auto r = run_check(s, "pointwise");
    ++counted;
    o.require(r.points.size() == 20, g.name + " used " + std::to_string(r.points.size()) + " points");
    o.require(r.pass, g.name + " has " + fmt(r.max_residual) + " disagreeing verdicts");
  }
  if (o.pass) o.detail << counted << " gallery instances x 20 points, all verdicts agree";
  return o;
}

// ---- 5
Outcome momentum_builder() {
  Outcome o;
  double worst = 0.0, torsion = 0.0;
  auto cases = momentum_cases(10);
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& m = cases[k];
    auto inst = momentum_instance(m);
    auto h2 = check_H2(inst);
    worst = std::max(worst, h2.max_residual);
    o.require(h2.pass && h2.max_residual <= 1e-8, "case " + std::to_string(k) + " H2 residual " + fmt(h2.max_residual));
    o.require(check_H1(inst).pass, "case " + std::to_string(k) + " H1 failed");
    auto c = m.P->chart();
    int n = c->dim();
    auto before = m.D.dual(), after = m.Dp.dual();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        auto vi = coordinate_vector(c, i), vj = coordinate_vector(c, j);
        auto diff = after.torsion_TM(vi, vj) - before.torsion_TM(vi, vj);
        for (const auto& p : m.points) torsion = std::max(torsion, residual_at(diff, p, kOrder));
      }
  }
  o.require(torsion <= 1e-10, "dual TM torsion changed by " + fmt(torsion));
  if (o.pass) o.detail << cases.size() << " Darboux instances, max H2 residual " << fmt(worst);
  return o;
}

// ---- 6
Outcome theorem41() {
  Outcome o;
  auto c = Chart::make({"q", "p"});
  auto P = PoissonChart::make(bivector_from_upper(c, {"1"}));
  auto pts = box(2, 10, 6001, 0.5, 1.5);
  auto action = [&](std::vector<std::string> v) {
    return make_action_algebroid(P, StructureConstants::abelian(1), {vector_field(c, v)}, sampled(2));
  };
  std::vector<std::pair<Connection, bool>> cases;
  for (auto v : std::vector<std::vector<std::string>>{{"1", "0"}, {"0", "1"}, {"p", "-q"}, {"q", "-p"}, {"2*p", "0"}})
    cases.emplace_back(Connection::trivial(action(v)), true);
  for (auto v : std::vector<std::vector<std::string>>{{"q", "0"}, {"q + p", "0"}, {"0", "p"}, {"q", "p"}, {"q^2", "0"}})
    cases.emplace_back(Connection::trivial(action(v)), false);
  // translations with a curved connection: Gamma^1_{p,2} = q
  auto tr = make_action_algebroid(P, StructureConstants::abelian(2), {vector_field(c, {"1", "0"}), vector_field(c, {"0", "1"})},
                                  sampled(2));
  std::vector<std::string> gamma(8, "0");
  gamma[Connection::index(2, 1, 0, 1)] = "q";
  cases.emplace_back(Connection::from_strings(tr, gamma), false);

  int pos = 0, neg = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& [D, expected] = cases[k];
    auto r = theorem41_check(D, pts);
    int r_ = D.rank();
    double grid = std::pow(static_cast<double>(std::size(kFiberNodes)), r_);
    o.require(r.metrics.at("verdict_agreement") == 1.0, "case " + std::to_string(k) + " verdicts disagree");
    o.require(r.pass == expected, "case " + std::to_string(k) + " verdict " + (r.pass ? "pass" : "fail"));
    o.require(r.metrics.at("fiber_grid_points") == grid, "case " + std::to_string(k) + " fiber grid too small");
    (expected ? pos : neg)++;
  }
  if (o.pass) o.detail << pos << " positive and " << neg << " negative instances agree";
  return o;
}

// ---- 7
Outcome bivector_map() {
  Outcome o;
  int counted = 0, hamiltonian = 0;
  auto record = [&](const std::string& label, const HamiltonianInstance& inst) {
    bool expected = check_H2(inst).pass && check_H3(inst).pass;
    auto r = bivector_map_residual(inst);
    ++counted;
    hamiltonian += expected;
    o.require(r.pass == expected, label + " bivector map verdict differs from H2 and H3");
  };
  for (const auto& g : gallery()) {
    auto s = parse_scenario(g.toml, g.name);
    if (!s.algebroid) continue;
    bool expected = run_check(s, "H2").pass && run_check(s, "H3").pass;
    auto r = run_check(s, "bivector_map");
    ++counted;
    hamiltonian += expected;
    o.require(r.pass == expected, g.name + " bivector map verdict differs from H2 and H3");
  }
  std::mt19937_64 rng(2007);
  auto c = Chart::make({"x", "y"});
  auto so3 = Field::constant(c, FieldKind::Table, StructureConstants::so3().upper());
  for (int k = 0; k < 3; ++k) {
    auto base = PoissonChart::make(bivector_from_upper(c, {k == 0 ? "0" : "1"}));
    auto B = make_lie_algebra_bundle(base, 3, so3, sampled(2));
    auto D = Connection::from_strings(B, random_connection_table(rng, *c, 3, {1, 3, 1.0}));
    std::vector<std::string> mu;
    for (int a = 0; a < 3; ++a) mu.push_back(random_polynomial(rng, c->coordinates(), {2, 3, 1.0}));
    record("bundle " + std::to_string(k), instance(B, D, B->dual_section(mu), box(2, 10, 7000 + k)));
  }
  auto cases = momentum_cases(2);
  for (std::size_t k = 0; k < cases.size(); ++k) record("momentum " + std::to_string(k), momentum_instance(cases[k]));
  if (o.pass) o.detail << counted << " instances (" << hamiltonian << " Hamiltonian), verdicts agree";
  return o;
}

// ---- 8
Outcome symplectic() {
  Outcome o;
  std::mt19937_64 rng(2008);
  auto c2 = Chart::make({"q", "p"});
  auto c4 = Chart::make({"q1", "q2", "p1", "p2"});
  std::vector<PoissonChartPtr> bases{PoissonChart::make(bivector_from_upper(c2, {"1 + q^2 + p^2"})),
                                     PoissonChart::make(bivector_from_upper(c2, {"exp(q)"})),
                                     PoissonChart::make(bivector_from_upper(c2, {"1"})),
                                     PoissonChart::make(bivector_from_upper(c4, {"0", "1", "0", "0", "1", "0"})),
                                     PoissonChart::make(bivector_from_upper(c2, {"2 + sin(p)"}))};
  double worst = 0.0;
  for (std::size_t k = 0; k < bases.size(); ++k) {
    const auto& P = bases[k];
    auto c = P->chart();
    auto T = make_tangent_algebroid(P);
    auto D = Connection::from_strings(T, random_symmetric_table(rng, *c, {1, 2, 0.5}));
    auto n = random_vector_field(rng, c, {2, 3, 1.0});
    auto r = symplectic_suite(P, D, n, box(c->dim(), 10, 8000 + k));
    double ident = r.metrics.at("dcheck_identity_residual");
    worst = std::max(worst, ident);
    o.require(r.pass, "instance " + std::to_string(k) + " has disagreeing verdicts");
    o.require(ident <= 1e-9, "instance " + std::to_string(k) + " identity residual " + fmt(ident));
  }
  if (o.pass) o.detail << bases.size() << " nondegenerate instances, identity residual " << fmt(worst);
  return o;
}

// ---- 9
Outcome negative_controls() {
  Outcome o;
  auto r4 = gallery_scenario("r4_nonpoisson");
  auto c = r4.chart;
  auto T = schouten(r4.poisson->pi(), r4.poisson->pi());
  auto s234 = apply(T, coordinate_differential(c, 1), coordinate_differential(c, 2), coordinate_differential(c, 3));
  double dev = 0.0;
  for (const auto& p : box(4, 25, 9001, -2.0, 2.0)) dev = std::max(dev, std::abs(value_at(s234, p) + 2.0));
  o.require(dev <= 1e-9, "Schouten (2,3,4) deviates from -2 by " + fmt(dev));

  auto xdx = gallery_scenario("x_dx_action");
  auto right = sample_box(SampleBox{{1.0, -2.0}, {2.0, 2.0}}, 10, 9002);
  auto left = sample_box(SampleBox{{-2.0, -2.0}, {-1.0, 2.0}}, 10, 9003);
  xdx.points = right;
  xdx.points.insert(xdx.points.end(), left.begin(), left.end());
  auto h1 = run_check(xdx, "H1");
  double least = h1.residuals.empty() ? 0.0 : *std::min_element(h1.residuals.begin(), h1.residuals.end());
  o.require(!h1.pass, "x_dx_action passes H1");
  o.require(h1.residuals.size() == 20 && least >= 0.9, "x_dx_action H1 residual " + fmt(least) + " at |x| >= 1");
  if (o.pass) o.detail << "Schouten deviation " << fmt(dev) << ", least x_dx H1 residual " << fmt(least);
  return o;
}

// ---- 10
Outcome calibration(const std::string& test_dir) {
  Outcome o;
  std::mt19937_64 rng(2010);
  auto c = Chart::make({"x", "y", "z"});
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    auto e = c->parse(random_smooth(rng, c->coordinates(), 2));
    Point p{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    auto jet = e.evaluate(p, 1);
    for (int i = 0; i < 3; ++i) {
      Point a = p, b = p;
      a[static_cast<std::size_t>(i)] += h;
      b[static_cast<std::size_t>(i)] -= h;
      double fd = (e.value(a) - e.value(b)) / (2 * h);
      double g = jet.gradient(i);
      worst = std::max(worst, std::abs(g - fd) / std::max(1.0, std::abs(g)));
    }
  }
  o.require(worst <= 1e-6, "finite difference relative error " + fmt(worst));

  double suite = -1.0;
  if (!test_dir.empty()) {
    auto t0 = Clock::now();
    for (const auto& entry : std::filesystem::directory_iterator(test_dir)) {
      auto name = entry.path().filename().string();
      if (!entry.is_regular_file() || name.rfind("test_", 0) != 0) continue;
      std::string cmd = "\"" + entry.path().string() + "\" > /dev/null 2>&1";
      o.require(std::system(cmd.c_str()) == 0, name + " failed");
    }
    suite = seconds_since(t0);
    o.require(suite <= 120.0, "unit tests took " + fmt(suite) + " s");
  }
  if (o.pass) {
    o.detail << "max relative error " << fmt(worst);
    if (suite >= 0) o.detail << ", unit tests " << fmt(suite) << " s";
    else o.detail << ", suite timing skipped (no --tests)";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hamla acceptance run"};
  std::string test_dir;
  app.add_option("--tests", test_dir, "directory holding the unit test executables, timed for criterion 10");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* label;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {"gallery fidelity", gallery_fidelity},
      {"identity suite", identity_suite},
      {"H3 form equivalence", h3_equivalence},
      {"pointwise equivalence", pointwise_equivalence},
      {"momentum connection builder", momentum_builder},
      {"dual space compatibility", theorem41},
      {"bivector map", bivector_map},
      {"symplectic equivalence", symplectic},
      {"negative controls", negative_controls},
      {"engine calibration", [&] { return calibration(test_dir); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail.str(std::string("error: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << criteria[k].label << ": " << o.detail.str()
              << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << "  " << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
