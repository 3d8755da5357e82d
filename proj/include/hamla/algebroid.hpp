#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hamla/poisson.hpp"

namespace hamla {

enum class AlgebroidKind { Action, Cotangent, Tangent, LieAlgebraBundle, Custom };

const char* algebroid_kind_name(AlgebroidKind kind);

/// Sample set and tolerance used by constructor-time validators.
struct Validation {
  std::vector<Point> points;
  int order = kDefaultJetOrder;
  double tol = 1e-9;
};

/// Constant structure constants c^g_{ab} of a Lie algebra, dense r x r x r.
class StructureConstants {
 public:
  explicit StructureConstants(int rank);
  static StructureConstants so3();
  static StructureConstants abelian(int rank);

  int rank() const noexcept { return rank_; }
  double operator()(int a, int b, int g) const { return c_[index(a, b, g)]; }
  /// Sets c^g_{ab} and c^g_{ba} = -value.
  void set(int a, int b, int g, double value);
  double& raw(int a, int b, int g) { return c_[index(a, b, g)]; }
  double antisymmetry_defect() const;
  double jacobi_defect() const;
  /// Upper-triangle storage used by LieAlgebroid: pair_index(r, a, b) * r + g.
  std::vector<double> upper() const;

 private:
  std::size_t index(int a, int b, int g) const {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(rank_) + static_cast<std::size_t>(b)) *
               static_cast<std::size_t>(rank_) +
           static_cast<std::size_t>(g);
  }
  int rank_;
  std::vector<double> c_;
};

/// Lie algebroid in a global frame e_1..e_r over a Poisson chart.
/// Anchor table: rho^i_a at i * r + a. Structure table: c^g_{ab} (a < b) at
/// pair_index(r, a, b) * r + g.
class LieAlgebroid {
 public:
  LieAlgebroid(PoissonChartPtr base, AlgebroidKind kind, std::vector<std::string> frame_names, Field anchor,
               Field structure);

  const PoissonChartPtr& base() const noexcept { return base_; }
  const ChartPtr& chart() const noexcept { return base_->chart(); }
  int dim() const { return base_->dim(); }
  int rank() const noexcept { return rank_; }
  AlgebroidKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& frame_names() const noexcept { return frame_names_; }
  const Field& anchor_table() const noexcept { return anchor_; }
  const Field& structure_table() const noexcept { return structure_; }

  SectionA frame(int a) const;
  SectionAStar coframe(int a) const;
  SectionA section(const std::vector<std::string>& components) const;
  SectionAStar dual_section(const std::vector<std::string>& components) const;

  VectorField anchor(const SectionA& a) const;
  /// [a,b]^g = a^a b^b c^g_{ab} + (rho a) . b^g - (rho b) . a^g
  SectionA bracket(const SectionA& a, const SectionA& b) const;
  ScalarField pairing(const SectionAStar& mu, const SectionA& a) const;
  /// (d_A mu)(a,b) = rho a . <mu,b> - rho b . <mu,a> - <mu,[a,b]>
  ScalarField d_A(const SectionAStar& mu, const SectionA& a, const SectionA& b) const;

  /// max over points and frame triples of |[[e_a,e_b],e_c] + cyclic|
  Worst jacobiator_residual(std::span<const Point> points, int order) const;
  /// max over points and frame pairs of |rho[e_a,e_b] - [rho e_a, rho e_b]|
  Worst anchor_residual(std::span<const Point> points, int order) const;
  void validate(const Validation& v) const;

 private:
  void require_section(const Field& f, std::size_t rank, const char* what) const;

  PoissonChartPtr base_;
  AlgebroidKind kind_;
  int rank_;
  std::vector<std::string> frame_names_;
  Field anchor_;
  Field structure_;
};

using AlgebroidPtr = std::shared_ptr<const LieAlgebroid>;

Jet structure_entry(const Jets& upper, int r, int a, int b, int g, int jet_dim, int order);

AlgebroidPtr make_action_algebroid(PoissonChartPtr base, const StructureConstants& c,
                                   const std::vector<VectorField>& action, const Validation& v);
AlgebroidPtr make_cotangent_algebroid(PoissonChartPtr base, const Validation& v);
AlgebroidPtr make_tangent_algebroid(PoissonChartPtr base);
/// `structure` uses the upper-triangle layout of LieAlgebroid.
AlgebroidPtr make_lie_algebra_bundle(PoissonChartPtr base, int rank, Field structure, const Validation& v);
AlgebroidPtr make_custom_algebroid(PoissonChartPtr base, int rank, Field anchor, Field structure, const Validation& v);

/// Structure table from a dense string table c[a][b][g]; checks antisymmetry at `probe`.
Field structure_from_dense(const ChartPtr& chart, int rank, const std::vector<std::vector<std::vector<std::string>>>& c,
                           std::span<const Point> probe);

// Sections of the cotangent algebroid are one-forms and sections of its dual
// are vector fields; these reinterpret the components.
SectionA as_section(const OneForm& alpha);
SectionA as_section(const VectorField& v);
SectionAStar as_dual_section(const VectorField& v);
SectionAStar as_dual_section(const OneForm& alpha);
OneForm as_one_form(const Field& f);
VectorField as_vector_field(const Field& f);

}  // namespace hamla
