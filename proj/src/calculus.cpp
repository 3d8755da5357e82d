#include "hamla/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "hamla/errors.hpp"

namespace hamla {

namespace {

int jet_dim(const std::vector<Jets>& in) {
  for (const auto& js : in)
    if (!js.empty()) return js.front().dim();
  return 0;
}

}  // namespace

ScalarField directional(const VectorField& v, const ScalarField& f) {
  require_same_chart(v, f, "directional derivative");
  int n = v.dim();
  return ScalarField(combine(v.chart(), FieldKind::Scalar, 1, {v, f}, {0, 1}, [n](const std::vector<Jets>& in, int k) {
    Jet out = zero_jet(jet_dim(in), k);
    for (int l = 0; l < n; ++l) out += in[0][static_cast<std::size_t>(l)] * in[1][0].derivative(l);
    return Jets{out};
  }));
}

OneForm d(const ScalarField& f) {
  int n = f.dim();
  return OneForm(combine(f.chart(), FieldKind::OneForm, static_cast<std::size_t>(n), {f}, 1,
                         [n](const std::vector<Jets>& in, int) {
                           Jets out;
                           for (int i = 0; i < n; ++i) out.push_back(in[0][0].derivative(i));
                           return out;
                         }));
}

TwoForm d(const OneForm& alpha) {
  int n = alpha.dim();
  return TwoForm(combine(alpha.chart(), FieldKind::TwoForm, pair_count(n), {alpha}, 1,
                         [n](const std::vector<Jets>& in, int) {
                           const Jets& a = in[0];
                           Jets out;
                           for (int i = 0; i < n; ++i)
                             for (int j = i + 1; j < n; ++j)
                               out.push_back(a[static_cast<std::size_t>(j)].derivative(i) -
                                             a[static_cast<std::size_t>(i)].derivative(j));
                           return out;
                         }));
}

VectorField lie_bracket(const VectorField& v, const VectorField& w) {
  require_same_chart(v, w, "lie bracket");
  int n = v.dim();
  return VectorField(combine(v.chart(), FieldKind::Vector, static_cast<std::size_t>(n), {v, w}, 1,
                             [n](const std::vector<Jets>& in, int k) {
                               const Jets& V = in[0];
                               const Jets& W = in[1];
                               Jets out;
                               for (int i = 0; i < n; ++i) {
                                 Jet c = zero_jet(jet_dim(in), k);
                                 for (int l = 0; l < n; ++l) {
                                   auto L = static_cast<std::size_t>(l);
                                   auto I = static_cast<std::size_t>(i);
                                   c += V[L].truncated(k) * W[I].derivative(l);
                                   c -= W[L].truncated(k) * V[I].derivative(l);
                                 }
                                 out.push_back(std::move(c));
                               }
                               return out;
                             }));
}

OneForm lie_derivative(const VectorField& v, const OneForm& alpha) {
  require_same_chart(v, alpha, "lie derivative");
  int n = v.dim();
  return OneForm(combine(v.chart(), FieldKind::OneForm, static_cast<std::size_t>(n), {v, alpha}, 1,
                         [n](const std::vector<Jets>& in, int k) {
                           const Jets& V = in[0];
                           const Jets& A = in[1];
                           Jets out;
                           for (int i = 0; i < n; ++i) {
                             Jet c = zero_jet(jet_dim(in), k);
                             for (int l = 0; l < n; ++l) {
                               auto L = static_cast<std::size_t>(l);
                               c += V[L].truncated(k) * A[static_cast<std::size_t>(i)].derivative(l);
                               c += A[L].truncated(k) * V[L].derivative(i);
                             }
                             out.push_back(std::move(c));
                           }
                           return out;
                         }));
}

BivectorField lie_derivative(const VectorField& v, const BivectorField& P) {
  require_same_chart(v, P, "lie derivative");
  int n = v.dim();
  return BivectorField(combine(
      v.chart(), FieldKind::Bivector, pair_count(n), {v, P}, 1, [n](const std::vector<Jets>& in, int k) {
        const Jets& V = in[0];
        int m = jet_dim(in);
        Jets Pm = bivector_matrix(in[1], n, m, k + 1);
        auto at = [&](int i, int j) -> const Jet& { return Pm[static_cast<std::size_t>(i * n + j)]; };
        Jets out;
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            Jet c = zero_jet(m, k);
            for (int l = 0; l < n; ++l) {
              c += V[static_cast<std::size_t>(l)].truncated(k) * at(i, j).derivative(l);
              c -= at(l, j).truncated(k) * V[static_cast<std::size_t>(i)].derivative(l);
              c -= at(i, l).truncated(k) * V[static_cast<std::size_t>(j)].derivative(l);
            }
            out.push_back(std::move(c));
          }
        }
        return out;
      }));
}

TrivectorField schouten(const BivectorField& P, const BivectorField& Q) {
  require_same_chart(P, Q, "schouten bracket");
  int n = P.dim();
  return TrivectorField(combine(
      P.chart(), FieldKind::Trivector, expected_components(FieldKind::Trivector, n), {P, Q}, 1,
      [n](const std::vector<Jets>& in, int k) {
        int m = jet_dim(in);
        Jets Pm = bivector_matrix(in[0], n, m, k + 1);
        Jets Qm = bivector_matrix(in[1], n, m, k + 1);
        auto idx = [n](int i, int j) { return static_cast<std::size_t>(i * n + j); };
        auto term = [&](int i, int j, int l) {
          Jet c = zero_jet(m, k);
          for (int dd = 0; dd < n; ++dd) {
            c += Pm[idx(i, dd)].truncated(k) * Qm[idx(j, l)].derivative(dd);
            c += Qm[idx(i, dd)].truncated(k) * Pm[idx(j, l)].derivative(dd);
          }
          return c;
        };
        Jets out;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            for (int l = j + 1; l < n; ++l) out.push_back(term(i, j, l) + term(j, l, i) + term(l, i, j));
        return out;
      }));
}

VectorField pi_sharp(const BivectorField& P, const OneForm& alpha) {
  require_same_chart(P, alpha, "pi sharp");
  int n = P.dim();
  return VectorField(combine(P.chart(), FieldKind::Vector, static_cast<std::size_t>(n), {P, alpha}, 0,
                             [n](const std::vector<Jets>& in, int k) {
                               int m = jet_dim(in);
                               Jets Pm = bivector_matrix(in[0], n, m, k);
                               Jets out;
                               for (int j = 0; j < n; ++j) {
                                 Jet c = zero_jet(m, k);
                                 for (int i = 0; i < n; ++i)
                                   c += in[1][static_cast<std::size_t>(i)] * Pm[static_cast<std::size_t>(i * n + j)];
                                 out.push_back(std::move(c));
                               }
                               return out;
                             }));
}

ScalarField pairing(const OneForm& alpha, const VectorField& v) {
  require_same_chart(alpha, v, "pairing");
  int n = v.dim();
  return ScalarField(combine(v.chart(), FieldKind::Scalar, 1, {alpha, v}, 0, [n](const std::vector<Jets>& in, int k) {
    Jet c = zero_jet(jet_dim(in), k);
    for (int i = 0; i < n; ++i) c += in[0][static_cast<std::size_t>(i)] * in[1][static_cast<std::size_t>(i)];
    return Jets{c};
  }));
}

ScalarField apply(const BivectorField& P, const OneForm& alpha, const OneForm& beta) {
  require_same_chart(P, alpha, "bivector evaluation");
  require_same_chart(P, beta, "bivector evaluation");
  int n = P.dim();
  return ScalarField(combine(P.chart(), FieldKind::Scalar, 1, {P, alpha, beta}, 0,
                             [n](const std::vector<Jets>& in, int k) {
                               int m = jet_dim(in);
                               Jet c = zero_jet(m, k);
                               for (int i = 0; i < n; ++i)
                                 for (int j = i + 1; j < n; ++j) {
                                   auto I = static_cast<std::size_t>(i);
                                   auto J = static_cast<std::size_t>(j);
                                   c += in[0][pair_index(n, i, j)] * (in[1][I] * in[2][J] - in[1][J] * in[2][I]);
                                 }
                               return Jets{c};
                             }));
}

ScalarField apply(const TwoForm& omega, const VectorField& v, const VectorField& w) {
  require_same_chart(omega, v, "two-form evaluation");
  require_same_chart(omega, w, "two-form evaluation");
  int n = omega.dim();
  return ScalarField(combine(omega.chart(), FieldKind::Scalar, 1, {omega, v, w}, 0,
                             [n](const std::vector<Jets>& in, int k) {
                               Jet c = zero_jet(jet_dim(in), k);
                               for (int i = 0; i < n; ++i)
                                 for (int j = i + 1; j < n; ++j) {
                                   auto I = static_cast<std::size_t>(i);
                                   auto J = static_cast<std::size_t>(j);
                                   c += in[0][pair_index(n, i, j)] * (in[1][I] * in[2][J] - in[1][J] * in[2][I]);
                                 }
                               return Jets{c};
                             }));
}

ScalarField apply(const TrivectorField& T, const OneForm& alpha, const OneForm& beta, const OneForm& gamma) {
  require_same_chart(T, alpha, "trivector evaluation");
  require_same_chart(T, beta, "trivector evaluation");
  require_same_chart(T, gamma, "trivector evaluation");
  int n = T.dim();
  return ScalarField(combine(T.chart(), FieldKind::Scalar, 1, {T, alpha, beta, gamma}, 0,
                             [n](const std::vector<Jets>& in, int k) {
                               int m = jet_dim(in);
                               Jet c = zero_jet(m, k);
                               if (n < 3) return Jets{c};
                               for (int i = 0; i < n; ++i)
                                 for (int j = 0; j < n; ++j)
                                   for (int l = 0; l < n; ++l) {
                                     if (i == j || j == l || i == l) continue;
                                     c += trivector_entry(in[0], n, i, j, l, m, k) * in[1][static_cast<std::size_t>(i)] *
                                          in[2][static_cast<std::size_t>(j)] * in[3][static_cast<std::size_t>(l)];
                                   }
                               return Jets{c};
                             }));
}

VectorField hamiltonian_vf(const BivectorField& P, const ScalarField& f) { return -pi_sharp(P, d(f)); }

ScalarField poisson_bracket(const BivectorField& P, const ScalarField& f, const ScalarField& g) {
  return apply(P, d(f), d(g));
}

double max_abs_at(const Field& f, std::span<const double> p, int ambient_order) {
  double m = 0.0;
  for (double v : f.values(p, ambient_order)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace hamla
