#pragma once

#include "hamla/field.hpp"

namespace hamla {

// Conventions: Pi = 1/2 Pi^{ij} d_i ^ d_j, (Pi# a)^j = a_i Pi^{ij},
// Pi(a, b) = a_i Pi^{ij} b_j, {f, g} = Pi(df, dg), X_f = -Pi# df.

/// v . f
ScalarField directional(const VectorField& v, const ScalarField& f);
/// df
OneForm d(const ScalarField& f);
/// (d a)_{ij} = d_i a_j - d_j a_i, stored for i < j.
TwoForm d(const OneForm& alpha);

/// [v, w]^i = v^l d_l w^i - w^l d_l v^i
VectorField lie_bracket(const VectorField& v, const VectorField& w);
/// (L_v a)_k = v^l d_l a_k + a_l d_k v^l
OneForm lie_derivative(const VectorField& v, const OneForm& alpha);
/// (L_v P)^{ij} = v^l d_l P^{ij} - P^{lj} d_l v^i - P^{il} d_l v^j
BivectorField lie_derivative(const VectorField& v, const BivectorField& P);

/// [P, Q]^{ijk} = sum over cyclic (i,j,k) of P^{id} d_d Q^{jk} + Q^{id} d_d P^{jk}.
/// With this normalization [P, Q](df, dg, dh) = {f,{g,h}_Q}_P + {f,{g,h}_P}_Q + cyclic.
TrivectorField schouten(const BivectorField& P, const BivectorField& Q);

VectorField pi_sharp(const BivectorField& P, const OneForm& alpha);
ScalarField pairing(const OneForm& alpha, const VectorField& v);
ScalarField apply(const BivectorField& P, const OneForm& alpha, const OneForm& beta);
ScalarField apply(const TwoForm& omega, const VectorField& v, const VectorField& w);
ScalarField apply(const TrivectorField& T, const OneForm& alpha, const OneForm& beta, const OneForm& gamma);

VectorField hamiltonian_vf(const BivectorField& P, const ScalarField& f);
ScalarField poisson_bracket(const BivectorField& P, const ScalarField& f, const ScalarField& g);

/// Max abs component of the trivector at p (for [Pi, Pi] style residuals).
double max_abs_at(const Field& f, std::span<const double> p, int ambient_order);

}  // namespace hamla
