#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hamla/connection.hpp"
#include "hamla/report.hpp"
#include "hamla/sampling.hpp"

namespace hamla {

/// Lie algebroid with connection D and candidate momentum section mu, together
/// with the sample set the checks run on.
struct HamiltonianInstance {
  AlgebroidPtr A;
  Connection D;
  SectionAStar mu;
  std::optional<OneForm> eta;
  std::optional<OneForm> eta_bar;
  std::vector<Point> points;
  int order = kDefaultJetOrder;
  double tol = kDefaultTolerance;
  std::uint64_t seed = kDefaultSeed;

  /// Throws ShapeError unless A, D and mu share one chart and the ranks match.
  void validate_shapes() const;
};

/// max(1, |Pi|, |rho|, |c|, |Gamma|, |mu|) at p.
double input_scale(const HamiltonianInstance& inst, const Point& p);
/// Largest absolute component value of f at p; throws ConfigurationError when
/// f needs more derivatives than `order` provides.
double residual_at(const Field& f, const Point& p, int order);

/// Max over frame sections of |D^_{e_a} Pi|.
CheckReport check_H1(const HamiltonianInstance& inst);
/// rho e_a - Pi# <D mu, e_a>
CheckReport check_H2(const HamiltonianInstance& inst);
/// d_A-form residual (d_A mu)(e_a,e_b) - Pi(th_a, th_b). Metrics carry the
/// torsion-form residual <mu, T_A(e_a,e_b)> + Pi(th_a, th_b) and the gap
/// between the two.
CheckReport check_H3(const HamiltonianInstance& inst);

/// omega = Pi^{-1} as a two-form (omega_{ij} Pi^{jk} = delta_i^k). Throws
/// PreconditionError when Pi is singular at an evaluation point.
TwoForm inverse_two_form(const BivectorField& pi);

// Presymplectic axioms with omega: D^ omega = 0, <D mu, a> = i_{rho a} omega,
// d_A mu(a, b) = -omega(rho a, rho b).
CheckReport check_H1_pre(const HamiltonianInstance& inst, const TwoForm& omega);
CheckReport check_H2_pre(const HamiltonianInstance& inst, const TwoForm& omega);
CheckReport check_H3_pre(const HamiltonianInstance& inst, const TwoForm& omega);

/// L_mu Pi - Pi; with eta also (d eta)(Pi# dx^i, Pi# dx^j) - Pi^{ij}
/// (metric "eta_residual") and whether both verdicts agree.
CheckReport liouville_residual(const PoissonChartPtr& P, const VectorField& mu, const std::optional<OneForm>& eta,
                               std::span<const Point> points, int order = kDefaultJetOrder,
                               double tol = kDefaultTolerance);

struct MomentumConnectionOptions {
  std::vector<Point> points;
  int order = kDefaultJetOrder;
  double tol = 1e-8;
  /// Smallest admissible |Pi# eta| at a sample point.
  double min_norm = 1e-8;
};

/// Modifies a Poisson-anchored T*M connection so that mu = Pi# eta becomes a
/// momentum section: D' = D + C with C(a, v, w) built from
/// B(a, v) = -(D_v Pi)(eta, a) + Pi(a, D_v eta) - <a, v>.
Connection build_momentum_connection(const PoissonChartPtr& P, const Connection& D, const OneForm& eta,
                                     const std::optional<OneForm>& eta_bar, const MomentumConnectionOptions& opt);

/// Section with a^g(x) = value^g - Gamma^g_{ib}(m) value^b (x^i - m^i).
SectionA horizontal_section_at(const Connection& D, const Point& m, const std::vector<double>& value);

struct PointwiseResult {
  Point m;
  // Classical conditions on horizontal sections at m.
  double p1 = 0.0;  // L_{rho a} Pi
  double p2 = 0.0;  // rho a - Pi# d<mu, a>
  double p3 = 0.0;  // <mu, [a, b]> - rho a . <mu, b>
  // The tensorial residuals at m.
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double horizontality = 0.0;  // max |(D a)(m)|
  double scale = 1.0;
};

PointwiseResult pointwise_at(const HamiltonianInstance& inst, const Point& m);
/// Pointwise conditions at each m; the residual counts verdicts that disagree
/// with the tensorial checks (H3 compared only where H2 holds).
CheckReport pointwise_checks(const HamiltonianInstance& inst, std::span<const Point> ms);
CheckReport pointwise_checks(const HamiltonianInstance& inst, const Point& m);

/// L_{rho a} <mu, b> - <mu, [a, b] + D_{rho b} a>
CheckReport invariance_residual(const HamiltonianInstance& inst, const SectionA& a, const SectionA& b,
                                std::span<const Point> points);
/// Same identity over all frame pairs.
CheckReport invariance_residual(const HamiltonianInstance& inst);

struct CoisotropyOptions {
  double delta = 1e-6;
  double rank_cutoff = 1e-8;
  double neighborhood = 1e-4;
  double tol = 1e-8;
};

/// Compares Pi#(span <D mu, e_a>_m) with rho(A_m). Throws PreconditionError
/// when |mu(m)| > delta.
CheckReport coisotropy_witness(const HamiltonianInstance& inst, const Point& m, const CoisotropyOptions& opt = {});

/// Cross-checks on a nondegenerate chart: cotangent data (D dual, mu = n), the
/// transported TM connection D'_v u = D_v u + Pi#(i_u D_v omega) with
/// mu = i_n omega, and the presymplectic presentation. Residual counts
/// verdict disagreements; the raw residuals are metrics.
CheckReport symplectic_suite(const PoissonChartPtr& P, const Connection& D, const VectorField& n,
                             std::span<const Point> points, int order = kDefaultJetOrder,
                             double tol = kDefaultTolerance);

/// D'_i d_j = D_i d_j + (D_i omega)_{jb} Pi^{bk} d_k
Connection transported_connection(const Connection& D, const TwoForm& omega);

struct ConnectionFlags {
  bool torsion_free = false;
  bool d_pi = false;       // D Pi = 0
  bool dcheck_pi = false;  // D^ Pi = 0 on the tangent algebroid
  bool cotangent_torsion_free = false;
  double torsion_residual = 0.0;
  double d_pi_residual = 0.0;
  double dcheck_pi_residual = 0.0;
  double cotangent_torsion_residual = 0.0;
  // Only for T*M input: T_TM(Pi# a, Pi# b) = 0 and cotangent H1.
  std::optional<bool> torsion_on_leaves;
  std::optional<bool> cotangent_h1;
  double torsion_on_leaves_residual = 0.0;
  double cotangent_h1_residual = 0.0;
};

ConnectionFlags classify_flags(const PoissonChartPtr& P, const Connection& D, std::span<const Point> points,
                               int order = kDefaultJetOrder, double tol = kDefaultTolerance);
/// Flags as metrics; residual 1 when one of the expected equivalences fails.
CheckReport classify_connection(const PoissonChartPtr& P, const Connection& D, std::span<const Point> points,
                                int order = kDefaultJetOrder, double tol = kDefaultTolerance);

}  // namespace hamla
