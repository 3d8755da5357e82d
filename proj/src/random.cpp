#include "hamla/random.hpp"

#include <cstdio>

#include "hamla/sampling.hpp"

namespace hamla {
namespace {

std::string coef(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", c);
  return buf;
}

int pick(std::mt19937_64& rng, int n) { return static_cast<int>(uniform01(rng) * n) % n; }

}  // namespace

std::string random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& names, const PolynomialSpec& spec) {
  std::string out = coef(uniform(rng, -spec.coefficient, spec.coefficient));
  if (spec.max_degree < 1) return out;
  for (int t = 0; t < spec.terms; ++t) {
    int degree = 1 + pick(rng, spec.max_degree);
    std::string mono = coef(uniform(rng, -spec.coefficient, spec.coefficient));
    for (int k = 0; k < degree; ++k) mono += "*" + names[static_cast<std::size_t>(pick(rng, static_cast<int>(names.size())))];
    out += " + " + mono;
  }
  return out;
}

std::string random_smooth(std::mt19937_64& rng, const std::vector<std::string>& names, int depth) {
  if (depth <= 0) return "(" + random_polynomial(rng, names, {2, 2, 1.0}) + ")";
  std::string u = random_smooth(rng, names, depth - 1);
  switch (pick(rng, 8)) {
    case 0: return "sin(" + u + ")";
    case 1: return "cos(" + u + ")";
    case 2: return "exp(0.5*" + u + ")";
    case 3: return "tanh(" + u + ")";
    case 4: return "log(1 + " + u + "^2)";
    case 5: return "sqrt(1 + " + u + "^2)";
    case 6: return u + "*" + random_smooth(rng, names, depth - 1);
    default: return u + "/(2 + sin(" + random_smooth(rng, names, depth - 1) + "))";
  }
}

std::vector<std::string> random_connection_table(std::mt19937_64& rng, const Chart& chart, int rank,
                                                 const PolynomialSpec& spec) {
  std::vector<std::string> out(static_cast<std::size_t>(chart.dim() * rank * rank));
  for (auto& s : out) s = random_polynomial(rng, chart.coordinates(), spec);
  return out;
}

std::vector<std::string> random_symmetric_table(std::mt19937_64& rng, const Chart& chart, const PolynomialSpec& spec) {
  const int n = chart.dim();
  std::vector<std::string> out(static_cast<std::size_t>(n * n * n));
  for (int g = 0; g < n; ++g)
    for (int i = 0; i < n; ++i)
      for (int b = i; b < n; ++b) {
        std::string s = random_polynomial(rng, chart.coordinates(), spec);
        out[Connection::index(n, i, g, b)] = s;
        out[Connection::index(n, b, g, i)] = s;
      }
  return out;
}

OneForm random_one_form(std::mt19937_64& rng, const ChartPtr& chart, const PolynomialSpec& spec) {
  std::vector<std::string> c;
  for (int i = 0; i < chart->dim(); ++i) c.push_back(random_polynomial(rng, chart->coordinates(), spec));
  return one_form(chart, c);
}

VectorField random_vector_field(std::mt19937_64& rng, const ChartPtr& chart, const PolynomialSpec& spec) {
  std::vector<std::string> c;
  for (int i = 0; i < chart->dim(); ++i) c.push_back(random_polynomial(rng, chart->coordinates(), spec));
  return vector_field(chart, c);
}

}  // namespace hamla
