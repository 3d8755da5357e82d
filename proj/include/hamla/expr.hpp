#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamla/jet.hpp"

namespace hamla {

enum class ExprKind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Tanh };

/// Immutable expression tree over indexed coordinates. Copies share nodes.
class Expr {
 public:
  struct Node;

  Expr() = default;

  static Expr number(double value);
  static Expr variable(int index, std::string name);
  static Expr unary(ExprKind kind, Expr operand);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);

  bool valid() const noexcept { return static_cast<bool>(node_); }
  ExprKind kind() const;
  double number_value() const;
  int variable_index() const;
  const std::string& variable_name() const;
  std::size_t arity() const;
  Expr operand(std::size_t i) const;

  /// True when no coordinate appears in the tree.
  bool is_constant() const;
  /// Largest coordinate index referenced, or -1.
  int max_variable() const;

  /// Order-k Taylor jet at `point` (dimension = point.size()).
  Jet evaluate(std::span<const double> point, int order) const;
  double value(std::span<const double> point) const;

  /// Canonical text; parse(to_string()) reproduces the same tree.
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Grammar (precedence ^ > unary minus > * / > + -, ^ right-associative):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | identifier | func '(' expr ')' | '(' expr ')'
Expr parse_expr(std::string_view source, std::span<const std::string> coordinates);

bool is_function_name(std::string_view name);

}  // namespace hamla
