#include "hamla/algebroid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hamla/errors.hpp"

namespace hamla {

const char* algebroid_kind_name(AlgebroidKind kind) {
  switch (kind) {
    case AlgebroidKind::Action: return "action";
    case AlgebroidKind::Cotangent: return "cotangent";
    case AlgebroidKind::Tangent: return "tangent";
    case AlgebroidKind::LieAlgebraBundle: return "lie_algebra_bundle";
    case AlgebroidKind::Custom: return "custom";
  }
  return "custom";
}

StructureConstants::StructureConstants(int rank)
    : rank_(rank), c_(static_cast<std::size_t>(rank) * static_cast<std::size_t>(rank) * static_cast<std::size_t>(rank), 0.0) {
  if (rank < 1) throw ShapeError("Lie algebra rank must be positive");
}

StructureConstants StructureConstants::so3() {
  StructureConstants c(3);
  c.set(0, 1, 2, 1.0);
  c.set(1, 2, 0, 1.0);
  c.set(2, 0, 1, 1.0);
  return c;
}

StructureConstants StructureConstants::abelian(int rank) { return StructureConstants(rank); }

void StructureConstants::set(int a, int b, int g, double value) {
  c_[index(a, b, g)] = value;
  c_[index(b, a, g)] = -value;
}

double StructureConstants::antisymmetry_defect() const {
  double m = 0.0;
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b)
      for (int g = 0; g < rank_; ++g) m = std::max(m, std::abs((*this)(a, b, g) + (*this)(b, a, g)));
  return m;
}

double StructureConstants::jacobi_defect() const {
  double m = 0.0;
  int r = rank_;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int g = 0; g < r; ++g)
        for (int e = 0; e < r; ++e) {
          // [[e_a,e_b],e_g] + [[e_b,e_g],e_a] + [[e_g,e_a],e_b], component e
          double s = 0.0;
          for (int d = 0; d < r; ++d)
            s += (*this)(a, b, d) * (*this)(d, g, e) + (*this)(b, g, d) * (*this)(d, a, e) +
                 (*this)(g, a, d) * (*this)(d, b, e);
          m = std::max(m, std::abs(s));
        }
  return m;
}

std::vector<double> StructureConstants::upper() const {
  std::vector<double> out;
  for (int a = 0; a < rank_; ++a)
    for (int b = a + 1; b < rank_; ++b)
      for (int g = 0; g < rank_; ++g) out.push_back((*this)(a, b, g));
  return out;
}

Jet structure_entry(const Jets& upper, int r, int a, int b, int g, int jet_dim, int order) {
  if (a == b) return zero_jet(jet_dim, order);
  if (a < b) return upper[pair_index(r, a, b) * static_cast<std::size_t>(r) + static_cast<std::size_t>(g)];
  return -upper[pair_index(r, b, a) * static_cast<std::size_t>(r) + static_cast<std::size_t>(g)];
}

LieAlgebroid::LieAlgebroid(PoissonChartPtr base, AlgebroidKind kind, std::vector<std::string> frame_names,
                           Field anchor, Field structure)
    : base_(std::move(base)),
      kind_(kind),
      rank_(static_cast<int>(frame_names.size())),
      frame_names_(std::move(frame_names)),
      anchor_(std::move(anchor)),
      structure_(std::move(structure)) {
  if (!base_) throw ShapeError("algebroid without base");
  if (rank_ < 1) throw ShapeError("algebroid rank must be positive");
  auto n = static_cast<std::size_t>(dim());
  auto r = static_cast<std::size_t>(rank_);
  if (anchor_.size() != n * r)
    throw ShapeError("anchor table needs " + std::to_string(n * r) + " entries, got " + std::to_string(anchor_.size()));
  if (structure_.size() != pair_count(rank_) * r)
    throw ShapeError("structure table needs " + std::to_string(pair_count(rank_) * r) + " entries, got " +
                     std::to_string(structure_.size()));
  if (!(*anchor_.chart() == *chart()) || !(*structure_.chart() == *chart()))
    throw ShapeError("algebroid data live on a different chart than the base");
}

void LieAlgebroid::require_section(const Field& f, std::size_t rank, const char* what) const {
  if (!(*f.chart() == *chart())) throw ShapeError(std::string(what) + " lives on a different base");
  if (f.size() != rank)
    throw ShapeError(std::string(what) + " has " + std::to_string(f.size()) + " components, rank is " +
                     std::to_string(rank));
}

SectionA LieAlgebroid::frame(int a) const {
  std::vector<double> v(static_cast<std::size_t>(rank_), 0.0);
  v.at(static_cast<std::size_t>(a)) = 1.0;
  return SectionA(Field::constant(chart(), FieldKind::SectionA, std::move(v)));
}

SectionAStar LieAlgebroid::coframe(int a) const {
  std::vector<double> v(static_cast<std::size_t>(rank_), 0.0);
  v.at(static_cast<std::size_t>(a)) = 1.0;
  return SectionAStar(Field::constant(chart(), FieldKind::SectionAStar, std::move(v)));
}

SectionA LieAlgebroid::section(const std::vector<std::string>& components) const {
  Field f = Field::from_strings(chart(), FieldKind::SectionA, components);
  require_section(f, static_cast<std::size_t>(rank_), "section");
  return SectionA(f);
}

SectionAStar LieAlgebroid::dual_section(const std::vector<std::string>& components) const {
  Field f = Field::from_strings(chart(), FieldKind::SectionAStar, components);
  require_section(f, static_cast<std::size_t>(rank_), "dual section");
  return SectionAStar(f);
}

VectorField LieAlgebroid::anchor(const SectionA& a) const {
  require_section(a, static_cast<std::size_t>(rank_), "section");
  int n = dim(), r = rank_;
  return VectorField(combine(chart(), FieldKind::Vector, static_cast<std::size_t>(n), {anchor_, a}, 0,
                             [n, r](const std::vector<Jets>& in, int k) {
                               int m = in[1][0].dim();
                               Jets out;
                               for (int i = 0; i < n; ++i) {
                                 Jet c = zero_jet(m, k);
                                 for (int al = 0; al < r; ++al)
                                   c += in[0][static_cast<std::size_t>(i * r + al)] * in[1][static_cast<std::size_t>(al)];
                                 out.push_back(std::move(c));
                               }
                               return out;
                             }));
}

SectionA LieAlgebroid::bracket(const SectionA& a, const SectionA& b) const {
  require_section(a, static_cast<std::size_t>(rank_), "section");
  require_section(b, static_cast<std::size_t>(rank_), "section");
  int n = dim(), r = rank_;
  return SectionA(combine(
      chart(), FieldKind::SectionA, static_cast<std::size_t>(r), {anchor_, structure_, a, b}, {0, 0, 1, 1},
      [n, r](const std::vector<Jets>& in, int k) {
        const Jets& rho = in[0];
        const Jets& c = in[1];
        int m = in[2][0].dim();
        Jets a0, b0;
        for (int al = 0; al < r; ++al) {
          a0.push_back(in[2][static_cast<std::size_t>(al)].truncated(k));
          b0.push_back(in[3][static_cast<std::size_t>(al)].truncated(k));
        }
        Jets ra, rb;
        for (int i = 0; i < n; ++i) {
          Jet x = zero_jet(m, k), y = zero_jet(m, k);
          for (int al = 0; al < r; ++al) {
            x += rho[static_cast<std::size_t>(i * r + al)] * a0[static_cast<std::size_t>(al)];
            y += rho[static_cast<std::size_t>(i * r + al)] * b0[static_cast<std::size_t>(al)];
          }
          ra.push_back(std::move(x));
          rb.push_back(std::move(y));
        }
        Jets out;
        for (int g = 0; g < r; ++g) {
          Jet s = zero_jet(m, k);
          for (int al = 0; al < r; ++al)
            for (int be = al + 1; be < r; ++be) {
              auto A = static_cast<std::size_t>(al), B = static_cast<std::size_t>(be);
              s += c[pair_index(r, al, be) * static_cast<std::size_t>(r) + static_cast<std::size_t>(g)] *
                   (a0[A] * b0[B] - a0[B] * b0[A]);
            }
          for (int i = 0; i < n; ++i) {
            s += ra[static_cast<std::size_t>(i)] * in[3][static_cast<std::size_t>(g)].derivative(i);
            s -= rb[static_cast<std::size_t>(i)] * in[2][static_cast<std::size_t>(g)].derivative(i);
          }
          out.push_back(std::move(s));
        }
        return out;
      }));
}

ScalarField LieAlgebroid::pairing(const SectionAStar& mu, const SectionA& a) const {
  require_section(mu, static_cast<std::size_t>(rank_), "dual section");
  require_section(a, static_cast<std::size_t>(rank_), "section");
  int r = rank_;
  return ScalarField(combine(chart(), FieldKind::Scalar, 1, {mu, a}, 0, [r](const std::vector<Jets>& in, int k) {
    Jet s = zero_jet(in[0][0].dim(), k);
    for (int al = 0; al < r; ++al) s += in[0][static_cast<std::size_t>(al)] * in[1][static_cast<std::size_t>(al)];
    return Jets{s};
  }));
}

ScalarField LieAlgebroid::d_A(const SectionAStar& mu, const SectionA& a, const SectionA& b) const {
  return directional(anchor(a), pairing(mu, b)) - directional(anchor(b), pairing(mu, a)) - pairing(mu, bracket(a, b));
}

namespace {

double table_scale(const LieAlgebroid& A, std::span<const double> p, int order) {
  double s = 1.0;
  auto bump = [&](const Field& f) {
    if (f.size() == 0) return;
    for (const auto& j : f.at(p, order)) s = std::max(s, std::abs(j.value()));
  };
  bump(A.anchor_table());
  bump(A.structure_table());
  bump(A.base()->pi());
  return s;
}

}  // namespace

Worst LieAlgebroid::jacobiator_residual(std::span<const Point> points, int order) const {
  std::vector<Field> jac;
  for (int a = 0; a < rank_; ++a)
    for (int b = a + 1; b < rank_; ++b)
      for (int c = b + 1; c < rank_; ++c) {
        SectionA ea = frame(a), eb = frame(b), ec = frame(c);
        jac.push_back(bracket(bracket(ea, eb), ec) + bracket(bracket(eb, ec), ea) + bracket(bracket(ec, ea), eb));
      }
  Worst w;
  for (const auto& p : points) {
    double s = table_scale(*this, p, order);
    for (const auto& f : jac) {
      double r = max_abs_at(f, p, order) / (s * s);
      if (r > w.value || w.point.empty()) {
        w.value = std::max(w.value, r);
        w.point = p;
      }
    }
  }
  return w;
}

Worst LieAlgebroid::anchor_residual(std::span<const Point> points, int order) const {
  std::vector<Field> res;
  for (int a = 0; a < rank_; ++a)
    for (int b = a + 1; b < rank_; ++b) {
      SectionA ea = frame(a), eb = frame(b);
      res.push_back(anchor(bracket(ea, eb)) - lie_bracket(anchor(ea), anchor(eb)));
    }
  Worst w;
  for (const auto& p : points) {
    double s = table_scale(*this, p, order);
    for (const auto& f : res) {
      double r = max_abs_at(f, p, order) / (s * s);
      if (r > w.value || w.point.empty()) {
        w.value = std::max(w.value, r);
        w.point = p;
      }
    }
  }
  return w;
}

static std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void LieAlgebroid::validate(const Validation& v) const {
  Worst j = jacobiator_residual(v.points, v.order);
  if (j.value > v.tol)
    throw ValidationError(std::string(algebroid_kind_name(kind_)) + " algebroid fails the Jacobi identity (residual " +
                              fmt(j.value) + ")",
                          j.point);
  Worst an = anchor_residual(v.points, v.order);
  if (an.value > v.tol)
    throw ValidationError(std::string(algebroid_kind_name(kind_)) + " algebroid anchor is not a bracket morphism (residual " +
                              fmt(an.value) + ")",
                          an.point);
}

static std::vector<std::string> default_frame(int r, const char* stem) {
  std::vector<std::string> names;
  for (int a = 1; a <= r; ++a) names.push_back(std::string(stem) + std::to_string(a));
  return names;
}

AlgebroidPtr make_action_algebroid(PoissonChartPtr base, const StructureConstants& c,
                                   const std::vector<VectorField>& action, const Validation& v) {
  int r = c.rank();
  if (c.antisymmetry_defect() > 0.0) throw ValidationError("structure constants are not antisymmetric");
  if (action.size() != static_cast<std::size_t>(r))
    throw ShapeError("action algebroid needs one vector field per Lie algebra generator");
  int n = base->dim();
  std::vector<Field> entries;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < r; ++a) entries.push_back(action[static_cast<std::size_t>(a)].component(static_cast<std::size_t>(i)));
  Field anchor = stack(base->chart(), FieldKind::Table, entries);
  Field structure = Field::constant(base->chart(), FieldKind::Table, c.upper());
  auto A = std::make_shared<const LieAlgebroid>(base, AlgebroidKind::Action, default_frame(r, "e"), anchor, structure);
  A->validate(v);
  return A;
}

AlgebroidPtr make_cotangent_algebroid(PoissonChartPtr base, const Validation& v) {
  base->validate(v.points, v.order, v.tol);
  const ChartPtr& chart = base->chart();
  int n = base->dim();
  const BivectorField& pi = base->pi();
  // rho^j_i = -Pi^{ij}
  Field anchor = combine(chart, FieldKind::Table, static_cast<std::size_t>(n * n), {pi}, 0,
                         [n](const std::vector<Jets>& in, int k) {
                           int m = in.empty() || in[0].empty() ? 0 : in[0][0].dim();
                           Jets out(static_cast<std::size_t>(n * n));
                           for (int j = 0; j < n; ++j)
                             for (int i = 0; i < n; ++i) {
                               Jet e = m ? bivector_entry(in[0], n, i, j, m, k) : Jet();
                               out[static_cast<std::size_t>(j * n + i)] = m ? -e : e;
                             }
                           return out;
                         });
  // c^k_{ij} is the dx^k coefficient of
  //   [dx^i, dx^j] = -L_{Pi# dx^i} dx^j + L_{Pi# dx^j} dx^i + d Pi(dx^i, dx^j)
  std::vector<Field> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      OneForm dxi = coordinate_differential(chart, i), dxj = coordinate_differential(chart, j);
      OneForm br = -lie_derivative(pi_sharp(pi, dxi), dxj) + lie_derivative(pi_sharp(pi, dxj), dxi) +
                   d(apply(pi, dxi, dxj));
      for (int k = 0; k < n; ++k) entries.push_back(br.component(static_cast<std::size_t>(k)));
    }
  Field structure = entries.empty() ? Field::zero(chart, FieldKind::Table, 0) : stack(chart, FieldKind::Table, entries);
  std::vector<std::string> frame;
  for (const auto& x : chart->coordinates()) frame.push_back("d" + x);
  if (n == 1) anchor = Field::zero(chart, FieldKind::Table, 1);
  auto A = std::make_shared<const LieAlgebroid>(base, AlgebroidKind::Cotangent, frame, anchor, structure);
  A->validate(v);
  return A;
}

AlgebroidPtr make_tangent_algebroid(PoissonChartPtr base) {
  int n = base->dim();
  std::vector<double> id(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i * n + i)] = 1.0;
  std::vector<std::string> frame;
  for (const auto& x : base->chart()->coordinates()) frame.push_back("d_" + x);
  Field anchor = Field::constant(base->chart(), FieldKind::Table, id);
  Field structure = Field::zero(base->chart(), FieldKind::Table, pair_count(n) * static_cast<std::size_t>(n));
  return std::make_shared<const LieAlgebroid>(base, AlgebroidKind::Tangent, frame, anchor, structure);
}

AlgebroidPtr make_lie_algebra_bundle(PoissonChartPtr base, int rank, Field structure, const Validation& v) {
  Field anchor = Field::zero(base->chart(), FieldKind::Table, static_cast<std::size_t>(base->dim() * rank));
  auto A = std::make_shared<const LieAlgebroid>(base, AlgebroidKind::LieAlgebraBundle, default_frame(rank, "e"), anchor,
                                                std::move(structure));
  Worst j = A->jacobiator_residual(v.points, v.order);
  if (j.value > v.tol) throw ValidationError("structure functions fail the Jacobi identity (residual " + fmt(j.value) + ")", j.point);
  return A;
}

AlgebroidPtr make_custom_algebroid(PoissonChartPtr base, int rank, Field anchor, Field structure, const Validation& v) {
  auto A = std::make_shared<const LieAlgebroid>(base, AlgebroidKind::Custom, default_frame(rank, "e"), std::move(anchor),
                                                std::move(structure));
  A->validate(v);
  return A;
}

Field structure_from_dense(const ChartPtr& chart, int rank,
                           const std::vector<std::vector<std::vector<std::string>>>& c, std::span<const Point> probe) {
  auto r = static_cast<std::size_t>(rank);
  if (c.size() != r) throw ShapeError("structure table must have rank x rank x rank entries");
  std::vector<std::vector<std::vector<Expr>>> e(r, std::vector<std::vector<Expr>>(r));
  for (std::size_t a = 0; a < r; ++a) {
    if (c[a].size() != r) throw ShapeError("structure table must have rank x rank x rank entries");
    for (std::size_t b = 0; b < r; ++b) {
      if (c[a][b].size() != r) throw ShapeError("structure table must have rank x rank x rank entries");
      for (std::size_t g = 0; g < r; ++g) e[a][b].push_back(chart->parse(c[a][b][g]));
    }
  }
  for (const auto& p : probe)
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = a; b < r; ++b)
        for (std::size_t g = 0; g < r; ++g) {
          double x = e[a][b][g].value(p), y = e[b][a][g].value(p);
          if (std::abs(x + y) > 1e-12 * std::max(1.0, std::abs(x)))
            throw ValidationError("structure functions are not antisymmetric in the lower indices", p);
        }
  std::vector<Expr> upper;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = a + 1; b < r; ++b)
      for (std::size_t g = 0; g < r; ++g) upper.push_back(e[a][b][g]);
  return Field::from_exprs(chart, FieldKind::Table, std::move(upper));
}

SectionA as_section(const OneForm& alpha) { return SectionA(alpha.retagged(FieldKind::SectionA)); }
SectionA as_section(const VectorField& v) { return SectionA(v.retagged(FieldKind::SectionA)); }
SectionAStar as_dual_section(const VectorField& v) { return SectionAStar(v.retagged(FieldKind::SectionAStar)); }
SectionAStar as_dual_section(const OneForm& alpha) { return SectionAStar(alpha.retagged(FieldKind::SectionAStar)); }
OneForm as_one_form(const Field& f) { return OneForm(f.retagged(FieldKind::OneForm)); }
VectorField as_vector_field(const Field& f) { return VectorField(f.retagged(FieldKind::Vector)); }

}  // namespace hamla
