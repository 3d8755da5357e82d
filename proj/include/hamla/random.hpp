#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hamla/connection.hpp"

namespace hamla {

/// Generators for property tests. Coefficients are printed with two decimals
/// so generated expressions stay readable in failure messages.
struct PolynomialSpec {
  int max_degree = 2;
  int terms = 3;
  double coefficient = 1.0;  // coefficients drawn from [-c, c]
};

std::string random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& names, const PolynomialSpec& spec);

/// Smooth composite of sin, cos, exp, tanh, log(1 + u^2), sqrt(1 + u^2) and
/// polynomials; defined everywhere.
std::string random_smooth(std::mt19937_64& rng, const std::vector<std::string>& names, int depth);

/// Coefficient table Gamma^g_{ib} at i * r * r + g * r + b with polynomial entries.
std::vector<std::string> random_connection_table(std::mt19937_64& rng, const Chart& chart, int rank,
                                                 const PolynomialSpec& spec);
/// TM table with Gamma^g_{ib} = Gamma^g_{bi}, so the connection is torsion-free.
std::vector<std::string> random_symmetric_table(std::mt19937_64& rng, const Chart& chart, const PolynomialSpec& spec);

OneForm random_one_form(std::mt19937_64& rng, const ChartPtr& chart, const PolynomialSpec& spec);
VectorField random_vector_field(std::mt19937_64& rng, const ChartPtr& chart, const PolynomialSpec& spec);

}  // namespace hamla
