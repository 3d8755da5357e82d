#include "hamla/connection.hpp"

#include "hamla/errors.hpp"

namespace hamla {

namespace {

using Idx = std::size_t;

Idx at(int i) { return static_cast<Idx>(i); }

}  // namespace

Connection::Connection(AlgebroidPtr algebroid, Field coefficients) : A_(std::move(algebroid)), gamma_(std::move(coefficients)) {
  if (!A_) throw ShapeError("connection without algebroid");
  auto want = static_cast<Idx>(dim()) * static_cast<Idx>(rank()) * static_cast<Idx>(rank());
  if (gamma_.size() != want)
    throw ShapeError("connection needs " + std::to_string(want) + " coefficients, got " + std::to_string(gamma_.size()));
  if (!(*gamma_.chart() == *chart())) throw ShapeError("connection coefficients live on a different chart");
}

Connection Connection::trivial(AlgebroidPtr algebroid) {
  auto size = static_cast<Idx>(algebroid->dim()) * static_cast<Idx>(algebroid->rank()) * static_cast<Idx>(algebroid->rank());
  ChartPtr chart = algebroid->chart();
  return Connection(std::move(algebroid), Field::zero(chart, FieldKind::Table, size));
}

Connection Connection::from_strings(AlgebroidPtr algebroid, const std::vector<std::string>& coefficients) {
  ChartPtr chart = algebroid->chart();
  return Connection(std::move(algebroid), Field::from_strings(chart, FieldKind::Table, coefficients));
}

Connection Connection::shifted(const Field& delta) const { return Connection(A_, add(gamma_, delta)); }

Connection Connection::dual() const {
  AlgebroidPtr other;
  if (A_->kind() == AlgebroidKind::Cotangent)
    other = make_tangent_algebroid(A_->base());
  else if (A_->kind() == AlgebroidKind::Tangent)
    other = make_cotangent_algebroid(A_->base(), Validation{});
  else
    throw ShapeError("dual connection is only defined for tangent and cotangent algebroids");
  int n = dim();
  Field g = combine(chart(), FieldKind::Table, gamma_.size(), {gamma_}, 0, [n](const std::vector<Jets>& in, int) {
    Jets out(in[0].size());
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) out[index(n, i, b, c)] = -in[0][index(n, i, c, b)];
    return out;
  });
  return Connection(other, g);
}

void Connection::require_kind(AlgebroidKind kind, const char* op) const {
  if (A_->kind() != kind)
    throw ShapeError(std::string(op) + " needs a connection on the " + algebroid_kind_name(kind) + " algebroid, got " +
                     algebroid_kind_name(A_->kind()));
}

SectionA Connection::covariant(const VectorField& v, const SectionA& a) const {
  require_same_chart(v, a, "covariant derivative");
  int n = dim(), r = rank();
  return SectionA(combine(chart(), FieldKind::SectionA, at(r), {gamma_, v, a}, {0, 0, 1},
                          [n, r](const std::vector<Jets>& in, int k) {
                            const Jets& G = in[0];
                            const Jets& V = in[1];
                            int m = V[0].dim();
                            Jets out;
                            for (int g = 0; g < r; ++g) {
                              Jet s = zero_jet(m, k);
                              for (int i = 0; i < n; ++i) {
                                Jet t = in[2][at(g)].derivative(i);
                                for (int b = 0; b < r; ++b) t += G[index(r, i, g, b)] * in[2][at(b)].truncated(k);
                                s += V[at(i)] * t;
                              }
                              out.push_back(std::move(s));
                            }
                            return out;
                          }));
}

SectionAStar Connection::covariant(const VectorField& v, const SectionAStar& mu) const {
  require_same_chart(v, mu, "covariant derivative");
  int n = dim(), r = rank();
  return SectionAStar(combine(chart(), FieldKind::SectionAStar, at(r), {gamma_, v, mu}, {0, 0, 1},
                              [n, r](const std::vector<Jets>& in, int k) {
                                const Jets& G = in[0];
                                const Jets& V = in[1];
                                int m = V[0].dim();
                                Jets out;
                                for (int b = 0; b < r; ++b) {
                                  Jet s = zero_jet(m, k);
                                  for (int i = 0; i < n; ++i) {
                                    Jet t = in[2][at(b)].derivative(i);
                                    for (int g = 0; g < r; ++g) t -= G[index(r, i, g, b)] * in[2][at(g)].truncated(k);
                                    s += V[at(i)] * t;
                                  }
                                  out.push_back(std::move(s));
                                }
                                return out;
                              }));
}

OneForm Connection::covariant_pairing(const SectionAStar& mu, const SectionA& a) const {
  std::vector<Field> comps;
  for (int i = 0; i < dim(); ++i) comps.push_back(A_->pairing(covariant(coordinate_vector(chart(), i), mu), a));
  return OneForm(stack(chart(), FieldKind::OneForm, comps));
}

VectorField Connection::opposite(const SectionA& a, const VectorField& v) const {
  return lie_bracket(A_->anchor(a), v) + A_->anchor(covariant(v, a));
}

OneForm Connection::opposite(const SectionA& a, const OneForm& beta) const {
  std::vector<Field> comps;
  VectorField ra = A_->anchor(a);
  for (int i = 0; i < dim(); ++i) {
    ScalarField bi(beta.component(at(i)));
    comps.push_back(directional(ra, bi) - pairing(beta, opposite(a, coordinate_vector(chart(), i))));
  }
  return OneForm(stack(chart(), FieldKind::OneForm, comps));
}

BivectorField Connection::dcheck_pi(const SectionA& a) const {
  // Expanding the pairing definition on the coordinate coframe gives
  // (L_{rho a} Pi)^{ij} + M^i_l Pi^{lj} + Pi^{il} M^j_l with M^i_l = rho^i_g (D_l a)^g.
  const BivectorField& pi = A_->base()->pi();
  int n = dim(), r = rank();
  BivectorField lie = lie_derivative(A_->anchor(a), pi);
  return BivectorField(combine(
      chart(), FieldKind::Bivector, pair_count(n), {lie, A_->anchor_table(), pi, gamma_, a}, {0, 0, 0, 0, 1},
      [n, r](const std::vector<Jets>& in, int k) {
        const Jets& rho = in[1];
        const Jets& G = in[3];
        const Jets& av = in[4];
        int m = av[0].dim();
        Jets P = bivector_matrix(in[2], n, m, k);
        Jets M(at(n * n), zero_jet(m, k));
        for (int l = 0; l < n; ++l) {
          Jets Dla;
          for (int g = 0; g < r; ++g) {
            Jet t = av[at(g)].derivative(l);
            for (int b = 0; b < r; ++b) t += G[index(r, l, g, b)] * av[at(b)].truncated(k);
            Dla.push_back(std::move(t));
          }
          for (int i = 0; i < n; ++i)
            for (int g = 0; g < r; ++g) M[at(i * n + l)] += rho[at(i * r + g)] * Dla[at(g)];
        }
        Jets out;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            Jet s = in[0][pair_index(n, i, j)];
            for (int l = 0; l < n; ++l) {
              s += M[at(i * n + l)] * P[at(l * n + j)];
              s += P[at(i * n + l)] * M[at(j * n + l)];
            }
            out.push_back(std::move(s));
          }
        return out;
      }));
}

TwoForm Connection::dcheck_form(const SectionA& a, const TwoForm& omega) const {
  // D^_a d_i = N^k_i d_k with N^k_i = -d_i (rho a)^k + rho^k_g (D_i a)^g
  int n = dim(), r = rank();
  VectorField ra = A_->anchor(a);
  return TwoForm(combine(
      chart(), FieldKind::TwoForm, pair_count(n), {ra, omega, A_->anchor_table(), gamma_, a}, {1, 1, 0, 0, 1},
      [n, r](const std::vector<Jets>& in, int k) {
        const Jets& RA = in[0];
        const Jets& rho = in[2];
        const Jets& G = in[3];
        const Jets& av = in[4];
        int m = av[0].dim();
        Jets W = bivector_matrix(in[1], n, m, k + 1);
        Jets N(at(n * n), zero_jet(m, k));
        for (int i = 0; i < n; ++i) {
          Jets Dia;
          for (int g = 0; g < r; ++g) {
            Jet t = av[at(g)].derivative(i);
            for (int b = 0; b < r; ++b) t += G[index(r, i, g, b)] * av[at(b)].truncated(k);
            Dia.push_back(std::move(t));
          }
          for (int kk = 0; kk < n; ++kk) {
            Jet s = -RA[at(kk)].derivative(i);
            for (int g = 0; g < r; ++g) s += rho[at(kk * r + g)] * Dia[at(g)];
            N[at(kk * n + i)] = std::move(s);
          }
        }
        Jets out;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            Jet s = zero_jet(m, k);
            for (int l = 0; l < n; ++l) s += RA[at(l)].truncated(k) * W[at(i * n + j)].derivative(l);
            for (int l = 0; l < n; ++l) {
              s -= N[at(l * n + i)] * W[at(l * n + j)].truncated(k);
              s -= N[at(l * n + j)] * W[at(i * n + l)].truncated(k);
            }
            out.push_back(std::move(s));
          }
        return out;
      }));
}

SectionA Connection::torsion(const SectionA& a, const SectionA& b) const {
  return covariant(A_->anchor(a), b) - covariant(A_->anchor(b), a) - A_->bracket(a, b);
}

SectionA Connection::covariant_torsion(const VectorField& v, const SectionA& a, const SectionA& b) const {
  return covariant(v, torsion(a, b)) - torsion(covariant(v, a), b) - torsion(a, covariant(v, b));
}

SectionA Connection::curvature(const VectorField& v, const VectorField& w, const SectionA& a) const {
  int n = dim(), r = rank();
  return SectionA(combine(chart(), FieldKind::SectionA, at(r), {gamma_, v, w, a}, {1, 0, 0, 0},
                          [n, r](const std::vector<Jets>& in, int k) {
                            const Jets& G1 = in[0];
                            Jets G0 = truncated(G1, k);
                            int m = in[1][0].dim();
                            Jets out;
                            for (int g = 0; g < r; ++g) {
                              Jet s = zero_jet(m, k);
                              for (int i = 0; i < n; ++i)
                                for (int j = 0; j < n; ++j) {
                                  Jet vw = in[1][at(i)] * in[2][at(j)];
                                  for (int b = 0; b < r; ++b) {
                                    Jet R = G1[index(r, j, g, b)].derivative(i) - G1[index(r, i, g, b)].derivative(j);
                                    for (int e = 0; e < r; ++e)
                                      R += G0[index(r, i, g, e)] * G0[index(r, j, e, b)] -
                                           G0[index(r, j, g, e)] * G0[index(r, i, e, b)];
                                    s += R * vw * in[3][at(b)];
                                  }
                                }
                              out.push_back(std::move(s));
                            }
                            return out;
                          }));
}

VectorField Connection::covariant(const VectorField& v, const VectorField& w) const {
  require_kind(AlgebroidKind::Tangent, "covariant derivative of a vector field");
  return as_vector_field(covariant(v, as_section(w)));
}

VectorField Connection::torsion_TM(const VectorField& v, const VectorField& w) const {
  return covariant(v, w) - covariant(w, v) - lie_bracket(v, w);
}

BivectorField Connection::covariant(const VectorField& v, const BivectorField& P) const {
  require_kind(AlgebroidKind::Tangent, "covariant derivative of a bivector");
  int n = dim();
  return BivectorField(combine(chart(), FieldKind::Bivector, pair_count(n), {gamma_, v, P}, {0, 0, 1},
                               [n](const std::vector<Jets>& in, int k) {
                                 const Jets& G = in[0];
                                 int m = in[1][0].dim();
                                 Jets PM = bivector_matrix(in[2], n, m, k + 1);
                                 Jets out;
                                 for (int j = 0; j < n; ++j)
                                   for (int l = j + 1; l < n; ++l) {
                                     Jet s = zero_jet(m, k);
                                     for (int i = 0; i < n; ++i) {
                                       Jet t = PM[at(j * n + l)].derivative(i);
                                       for (int q = 0; q < n; ++q) {
                                         t += G[index(n, i, j, q)] * PM[at(q * n + l)].truncated(k);
                                         t += G[index(n, i, l, q)] * PM[at(j * n + q)].truncated(k);
                                       }
                                       s += in[1][at(i)] * t;
                                     }
                                     out.push_back(std::move(s));
                                   }
                                 return out;
                               }));
}

TwoForm Connection::covariant(const VectorField& v, const TwoForm& omega) const {
  require_kind(AlgebroidKind::Tangent, "covariant derivative of a two-form");
  int n = dim();
  return TwoForm(combine(chart(), FieldKind::TwoForm, pair_count(n), {gamma_, v, omega}, {0, 0, 1},
                         [n](const std::vector<Jets>& in, int k) {
                           const Jets& G = in[0];
                           int m = in[1][0].dim();
                           Jets W = bivector_matrix(in[2], n, m, k + 1);
                           Jets out;
                           for (int a = 0; a < n; ++a)
                             for (int b = a + 1; b < n; ++b) {
                               Jet s = zero_jet(m, k);
                               for (int i = 0; i < n; ++i) {
                                 Jet t = W[at(a * n + b)].derivative(i);
                                 for (int c = 0; c < n; ++c) {
                                   t -= G[index(n, i, c, a)] * W[at(c * n + b)].truncated(k);
                                   t -= G[index(n, i, c, b)] * W[at(a * n + c)].truncated(k);
                                 }
                                 s += in[1][at(i)] * t;
                               }
                               out.push_back(std::move(s));
                             }
                           return out;
                         }));
}

OneForm Connection::covariant(const VectorField& v, const OneForm& beta) const {
  require_kind(AlgebroidKind::Cotangent, "covariant derivative of a one-form");
  return as_one_form(covariant(v, as_section(beta)));
}

OneForm Connection::torsion_TstarM(const OneForm& alpha, const OneForm& beta) const {
  require_kind(AlgebroidKind::Cotangent, "T*M torsion");
  const BivectorField& pi = A_->base()->pi();
  return -covariant(pi_sharp(pi, alpha), beta) + covariant(pi_sharp(pi, beta), alpha) -
         as_one_form(A_->bracket(as_section(alpha), as_section(beta)));
}

}  // namespace hamla
