#pragma once

#include <string>
#include <vector>

#include "hamla/algebroid.hpp"

namespace hamla {

/// Linear connection on an algebroid bundle: D_{d_i} e_b = Gamma^g_{ib} e_g,
/// stored at i * r * r + g * r + b. TM and T*M connections are connections on
/// the tangent and cotangent algebroids.
class Connection {
 public:
  Connection(AlgebroidPtr algebroid, Field coefficients);
  static Connection trivial(AlgebroidPtr algebroid);
  static Connection from_strings(AlgebroidPtr algebroid, const std::vector<std::string>& coefficients);
  static std::size_t index(int r, int i, int g, int b) { return static_cast<std::size_t>((i * r + g) * r + b); }

  const AlgebroidPtr& algebroid() const noexcept { return A_; }
  const ChartPtr& chart() const { return A_->chart(); }
  const Field& coefficients() const noexcept { return gamma_; }
  int dim() const { return A_->dim(); }
  int rank() const { return A_->rank(); }

  /// Same algebroid, coefficients Gamma + delta.
  Connection shifted(const Field& delta) const;
  /// Connection on the dual frame: Gamma~^b_{ig} = -Gamma^g_{ib}. Tangent and
  /// cotangent algebroids swap; other algebroids are not supported.
  Connection dual() const;

  /// (D_v a)^g = v^i (d_i a^g + Gamma^g_{ib} a^b)
  SectionA covariant(const VectorField& v, const SectionA& a) const;
  /// (D_v mu)_b = v^i (d_i mu_b - Gamma^g_{ib} mu_g)
  SectionAStar covariant(const VectorField& v, const SectionAStar& mu) const;
  /// <D mu, a> as a one-form: i-th component (D_i mu)(a).
  OneForm covariant_pairing(const SectionAStar& mu, const SectionA& a) const;

  /// Opposite A-connection on TM: D^_a v = [rho a, v] + rho(D_v a)
  VectorField opposite(const SectionA& a, const VectorField& v) const;
  /// Opposite A-connection on T*M: <D^_a b, d_i> = rho a . b_i - <b, D^_a d_i>
  OneForm opposite(const SectionA& a, const OneForm& beta) const;
  /// (D^_a Pi)(a, b) = rho a . Pi(a, b) - Pi(D^_a a, b) - Pi(a, D^_a b)
  BivectorField dcheck_pi(const SectionA& a) const;
  /// (D^_a w)(u, v) = rho a . w(u, v) - w(D^_a u, v) - w(u, D^_a v)
  TwoForm dcheck_form(const SectionA& a, const TwoForm& omega) const;

  /// T_A(a, b) = D_{rho a} b - D_{rho b} a - [a, b]
  SectionA torsion(const SectionA& a, const SectionA& b) const;
  /// (D_v T_A)(a, b) = D_v(T(a,b)) - T(D_v a, b) - T(a, D_v b)
  SectionA covariant_torsion(const VectorField& v, const SectionA& a, const SectionA& b) const;
  /// R(v, w) a from Gamma and its first derivatives.
  SectionA curvature(const VectorField& v, const VectorField& w, const SectionA& a) const;

  // TM connections (tangent algebroid).
  VectorField covariant(const VectorField& v, const VectorField& w) const;
  VectorField torsion_TM(const VectorField& v, const VectorField& w) const;
  /// (D_v P)^{jk} = v^i (d_i P^{jk} + Gamma^j_{il} P^{lk} + Gamma^k_{il} P^{jl})
  BivectorField covariant(const VectorField& v, const BivectorField& P) const;
  /// (D_v w)_{ab} = v^i (d_i w_{ab} - Gamma^c_{ia} w_{cb} - Gamma^c_{ib} w_{ac})
  TwoForm covariant(const VectorField& v, const TwoForm& omega) const;

  // T*M connections (cotangent algebroid).
  OneForm covariant(const VectorField& v, const OneForm& beta) const;
  /// T(a, b) = -D_{Pi# a} b + D_{Pi# b} a - [a, b]
  OneForm torsion_TstarM(const OneForm& alpha, const OneForm& beta) const;

 private:
  void require_kind(AlgebroidKind kind, const char* op) const;
  AlgebroidPtr A_;
  Field gamma_;
};

}  // namespace hamla
