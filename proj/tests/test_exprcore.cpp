#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hamla/errors.hpp"
#include "hamla/expr.hpp"
#include "hamla/random.hpp"
#include "hamla/sampling.hpp"

using namespace hamla;

namespace {

const std::vector<std::string> xyz{"x", "y", "z"};

Jet eval(const std::string& s, const std::vector<std::string>& names, std::vector<double> p, int order) {
  return parse_expr(s, names).evaluate(p, order);
}

// Polynomial with integer coefficients, kept as monomials so partials can be
// taken symbolically.
struct Monomial {
  long coef;
  std::vector<int> exps;
};

std::string print(const std::vector<Monomial>& poly, const std::vector<std::string>& names) {
  std::string s = "0";
  for (const auto& m : poly) {
    s += " + " + std::to_string(m.coef);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (m.exps[i] > 0) s += "*" + names[i] + "^" + std::to_string(m.exps[i]);
  }
  return s;
}

double partial(const std::vector<Monomial>& poly, const std::vector<int>& alpha, const std::vector<double>& p) {
  double total = 0;
  for (const auto& m : poly) {
    double term = static_cast<double>(m.coef);
    for (std::size_t i = 0; i < alpha.size() && term != 0; ++i) {
      int e = m.exps[i];
      for (int k = 0; k < alpha[i]; ++k) term *= (e - k);
      if (e < alpha[i]) term = 0;
      else term *= std::pow(p[i], e - alpha[i]);
    }
    total += term;
  }
  return total;
}

}  // namespace

TEST(Parser, SumOfProductAndSin) {
  Expr e = parse_expr("x*y + sin(z)", xyz);
  ASSERT_EQ(e.kind(), ExprKind::Add);
  EXPECT_EQ(e.operand(0).kind(), ExprKind::Mul);
  EXPECT_EQ(e.operand(1).kind(), ExprKind::Sin);
  EXPECT_EQ(e.operand(1).operand(0).variable_name(), "z");
}

TEST(Parser, PowerIsRightAssociative) {
  Expr e = parse_expr("x^2^3", xyz);
  ASSERT_EQ(e.kind(), ExprKind::Pow);
  EXPECT_EQ(e.operand(0).kind(), ExprKind::Variable);
  EXPECT_EQ(e.operand(1).kind(), ExprKind::Pow);
  std::vector<double> p{1.1, 0, 0};
  EXPECT_NEAR(e.value(p), std::pow(1.1, 8), 1e-12);
}

TEST(Parser, Precedence) {
  std::vector<double> p{3, 2, 0};
  EXPECT_DOUBLE_EQ(parse_expr("-x^2", xyz).value(p), -9);
  EXPECT_DOUBLE_EQ(parse_expr("x - y - 1", xyz).value(p), 0);
  EXPECT_DOUBLE_EQ(parse_expr("x / y * 2", xyz).value(p), 3);
  EXPECT_DOUBLE_EQ(parse_expr("2^-1", xyz).value(p), 0.5);
  EXPECT_DOUBLE_EQ(parse_expr("1/2 + 3/4", xyz).value(p), 1.25);
}

TEST(Parser, UnknownIdentifierNamesIt) {
  std::vector<std::string> xy{"x", "y"};
  try {
    parse_expr("x + w", xy);
    FAIL();
  } catch (const UnknownIdentifierError& e) {
    EXPECT_EQ(e.identifier(), "w");
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(Parser, SyntaxErrorsCarryPosition) {
  try {
    parse_expr("x + * y", xyz);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(parse_expr("", xyz), ParseError);
  EXPECT_THROW(parse_expr("sin x", xyz), ParseError);
  EXPECT_THROW(parse_expr("(x + y", xyz), ParseError);
  EXPECT_THROW(parse_expr("x y", xyz), ParseError);
}

TEST(Parser, PartialFunctionsFailAtEvaluation) {
  Expr e = parse_expr("log(x)", xyz);
  std::vector<double> bad{-1, 0, 0};
  EXPECT_THROW(e.evaluate(bad, 2), DomainError);
  EXPECT_THROW(eval("sqrt(x)", xyz, {0, 0, 0}, 1), DomainError);
  EXPECT_THROW(eval("1/x", xyz, {0, 0, 0}, 1), DomainError);
  EXPECT_NO_THROW(eval("log(x)", xyz, {2, 0, 0}, 2));
}

TEST(Jet, Examples) {
  Jet a = eval("x^2", {"x"}, {3}, 2);
  EXPECT_DOUBLE_EQ(a.value(), 9);
  EXPECT_DOUBLE_EQ(a.partial({0}), 6);
  EXPECT_DOUBLE_EQ(a.partial({0, 0}), 2);

  Jet s = eval("sin(x)", {"x"}, {0}, 2);
  EXPECT_DOUBLE_EQ(s.value(), 0);
  EXPECT_DOUBLE_EQ(s.partial({0}), 1);
  EXPECT_DOUBLE_EQ(s.partial({0, 0}), 0);

  Jet m = eval("x*y", {"x", "y"}, {2, 5}, 1);
  EXPECT_DOUBLE_EQ(m.value(), 10);
  EXPECT_DOUBLE_EQ(m.gradient(0), 5);
  EXPECT_DOUBLE_EQ(m.gradient(1), 2);
}

TEST(Jet, Arithmetic) {
  Jet x = Jet::variable(1, 2, 0, 1.0);
  Jet sq = x * x;
  EXPECT_DOUBLE_EQ(sq.value(), 1);
  EXPECT_DOUBLE_EQ(sq.partial({0}), 2);
  EXPECT_DOUBLE_EQ(sq.partial({0, 0}), 2);

  Jet f = eval("sin(x)*y + x^3", {"x", "y"}, {0.3, -0.8}, 3);
  EXPECT_EQ((f + (-f)).max_abs(), 0.0);

  Jet e1 = eval("exp(x)", {"x"}, {0.7}, 4);
  Jet e2 = eval("exp(-x)", {"x"}, {0.7}, 4);
  Jet one = e1 * e2;
  EXPECT_NEAR(one.value(), 1.0, 1e-12);
  for (std::size_t k = 1; k < one.coefficients().size(); ++k) EXPECT_NEAR(one.coefficients()[k], 0.0, 1e-12);

  Jet q = f / (f * f + 1.0);
  Jet back = q * (f * f + 1.0);
  for (std::size_t k = 0; k < f.coefficients().size(); ++k)
    EXPECT_NEAR(back.coefficients()[k], f.coefficients()[k], 1e-12);
}

TEST(Jet, MismatchedShapesAndZeroDivisor) {
  Jet a = Jet::variable(2, 2, 0, 1.0);
  Jet b = Jet::variable(3, 2, 0, 1.0);
  Jet c = Jet::variable(2, 1, 0, 1.0);
  EXPECT_THROW(a + b, ShapeError);
  EXPECT_THROW(a * c, ShapeError);
  EXPECT_THROW(a / Jet::variable(2, 2, 1, 0.0), DomainError);
}

TEST(Jet, MixedPartialsAreSymmetric) {
  Jet f = eval("sin(x*y)*exp(z) + x^2*y*z", xyz, {0.4, -1.2, 0.3}, 3);
  EXPECT_EQ(f.partial({0, 1}), f.partial({1, 0}));
  EXPECT_EQ(f.partial({0, 1, 2}), f.partial({2, 0, 1}));
  EXPECT_EQ(f.partial({0, 0, 2}), f.partial({2, 0, 0}));
  EXPECT_NEAR(f.partial({0, 1}), std::cos(-0.48) * std::exp(0.3) + 0.48 * std::sin(-0.48) * std::exp(0.3) + 2 * 0.4 * 0.3,
              1e-12);
}

// Integer coefficients at integer points: every partial is exact.
TEST(JetProperty, PolynomialPartialsExact) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 25; ++trial) {
    int dim = 1 + static_cast<int>(uniform01(rng) * 6) % 6;
    int order = 1 + static_cast<int>(uniform01(rng) * 4) % 4;
    std::vector<std::string> vars(names.begin(), names.begin() + dim);
    std::vector<Monomial> poly;
    for (int t = 0; t < 5; ++t) {
      Monomial m{static_cast<long>(uniform(rng, -9, 10)), std::vector<int>(static_cast<std::size_t>(dim), 0)};
      int deg = static_cast<int>(uniform01(rng) * (order + 1));
      for (int k = 0; k < deg; ++k) m.exps[static_cast<std::size_t>(uniform01(rng) * dim)]++;
      poly.push_back(m);
    }
    Expr e = parse_expr(print(poly, vars), vars);
    auto layout = JetLayout::get(dim, order);
    for (int pt = 0; pt < 100; ++pt) {
      std::vector<double> p;
      for (int i = 0; i < dim; ++i) p.push_back(std::floor(uniform(rng, -3, 4)));
      Jet j = e.evaluate(p, order);
      for (std::size_t k = 0; k < layout->size(); ++k) {
        auto alpha = layout->multi_index(k);
        std::vector<int> a(alpha.begin(), alpha.end());
        std::vector<int> vars_list;
        for (int i = 0; i < dim; ++i)
          for (int r = 0; r < a[static_cast<std::size_t>(i)]; ++r) vars_list.push_back(i);
        EXPECT_EQ(j.partial(vars_list), partial(poly, a, p)) << print(poly, vars);
      }
    }
  }
}

TEST(JetProperty, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    std::string s = random_smooth(rng, xyz, 2);
    Expr e = parse_expr(s, xyz);
    std::vector<double> p{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    Jet j = e.evaluate(p, 1);
    for (int i = 0; i < 3; ++i) {
      auto plus = p, minus = p;
      plus[static_cast<std::size_t>(i)] += h;
      minus[static_cast<std::size_t>(i)] -= h;
      double fd = (e.value(plus) - e.value(minus)) / (2 * h);
      double g = j.gradient(i);
      EXPECT_LE(std::abs(fd - g), 1e-6 * std::max(1.0, std::abs(g))) << s;
    }
  }
}

TEST(ParserProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s = trial % 2 ? random_smooth(rng, xyz, 3) : random_polynomial(rng, xyz, {3, 4, 5.0});
    Expr e = parse_expr(s, xyz);
    Expr again = parse_expr(e.to_string(), xyz);
    EXPECT_TRUE(again == e) << s << "\n" << e.to_string();
    EXPECT_EQ(again.to_string(), e.to_string());
  }
  for (std::string s : {"-x^2", "(-x)^2", "x-(y-z)", "x/(y*z)", "2^3^2", "-(-x)", "1e-3*x", "x^-2"}) {
    Expr e = parse_expr(s, xyz);
    EXPECT_TRUE(parse_expr(e.to_string(), xyz) == e) << s;
  }
}
