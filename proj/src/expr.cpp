#include "hamla/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "hamla/errors.hpp"

namespace hamla {

struct Expr::Node {
  ExprKind kind;
  double number = 0.0;
  int index = -1;
  std::string name;
  std::array<std::shared_ptr<const Node>, 2> child;
};

namespace {

constexpr std::array<std::pair<std::string_view, ExprKind>, 6> kFunctions{{
    {"sin", ExprKind::Sin},
    {"cos", ExprKind::Cos},
    {"exp", ExprKind::Exp},
    {"log", ExprKind::Log},
    {"sqrt", ExprKind::Sqrt},
    {"tanh", ExprKind::Tanh},
}};

std::string_view function_name(ExprKind k) {
  for (auto [name, kind] : kFunctions)
    if (kind == k) return name;
  return "?";
}

std::size_t arity_of(ExprKind k) {
  switch (k) {
    case ExprKind::Number:
    case ExprKind::Variable:
      return 0;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Pow:
      return 2;
    default:
      return 1;
  }
}

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Expr::Node& n, std::string& out, int min_prec);

void print_child(const std::shared_ptr<const Expr::Node>& c, std::string& out, int min_prec) {
  print(*c, out, min_prec);
}

void print(const Expr::Node& n, std::string& out, int min_prec) {
  int p = precedence(n.kind);
  bool paren = p < min_prec;
  if (paren) out += '(';
  switch (n.kind) {
    case ExprKind::Number:
      out += format_number(n.number);
      break;
    case ExprKind::Variable:
      out += n.name;
      break;
    case ExprKind::Neg:
      out += '-';
      print_child(n.child[0], out, 3);
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
      print_child(n.child[0], out, 1);
      out += n.kind == ExprKind::Add ? " + " : " - ";
      print_child(n.child[1], out, 2);
      break;
    case ExprKind::Mul:
    case ExprKind::Div:
      print_child(n.child[0], out, 2);
      out += n.kind == ExprKind::Mul ? "*" : "/";
      print_child(n.child[1], out, 3);
      break;
    case ExprKind::Pow:
      print_child(n.child[0], out, 5);
      out += '^';
      print_child(n.child[1], out, 3);
      break;
    default:
      out += function_name(n.kind);
      out += '(';
      print_child(n.child[0], out, 0);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

bool equal(const Expr::Node* a, const Expr::Node* b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Number:
      return a->number == b->number;
    case ExprKind::Variable:
      return a->index == b->index && a->name == b->name;
    default:
      for (std::size_t i = 0; i < arity_of(a->kind); ++i)
        if (!equal(a->child[i].get(), b->child[i].get())) return false;
      return true;
  }
}

Jet eval(const Expr::Node& n, std::span<const double> point, int order) {
  int dim = static_cast<int>(point.size());
  switch (n.kind) {
    case ExprKind::Number:
      return Jet::constant(dim, order, n.number);
    case ExprKind::Variable:
      if (n.index >= dim) throw ShapeError("point has no coordinate for '" + n.name + "'");
      return Jet::variable(dim, order, n.index, point[static_cast<std::size_t>(n.index)]);
    case ExprKind::Neg:
      return -eval(*n.child[0], point, order);
    case ExprKind::Add:
      return eval(*n.child[0], point, order) + eval(*n.child[1], point, order);
    case ExprKind::Sub:
      return eval(*n.child[0], point, order) - eval(*n.child[1], point, order);
    case ExprKind::Mul:
      return eval(*n.child[0], point, order) * eval(*n.child[1], point, order);
    case ExprKind::Div:
      return eval(*n.child[0], point, order) / eval(*n.child[1], point, order);
    case ExprKind::Pow: {
      Jet base = eval(*n.child[0], point, order);
      Jet e = eval(*n.child[1], point, order);
      bool constant_exponent = true;
      for (std::size_t k = 1; k < e.coefficients().size(); ++k)
        if (e.coefficients()[k] != 0.0) constant_exponent = false;
      if (constant_exponent) return pow(base, e.value());
      return exp(e * log(base));
    }
    case ExprKind::Sin:
      return sin(eval(*n.child[0], point, order));
    case ExprKind::Cos:
      return cos(eval(*n.child[0], point, order));
    case ExprKind::Exp:
      return exp(eval(*n.child[0], point, order));
    case ExprKind::Log:
      return log(eval(*n.child[0], point, order));
    case ExprKind::Sqrt:
      return sqrt(eval(*n.child[0], point, order));
    case ExprKind::Tanh:
      return tanh(eval(*n.child[0], point, order));
  }
  throw Error("corrupt expression node");
}

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> coords) : src_(src), coords_(coords) {}

  Expr parse() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    Expr e = expr();
    skip_space();
    if (pos_ < src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::binary(ExprKind::Add, lhs, term());
      else if (accept('-'))
        lhs = Expr::binary(ExprKind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::binary(ExprKind::Mul, lhs, unary());
      else if (accept('/'))
        lhs = Expr::binary(ExprKind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(ExprKind::Neg, unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(ExprKind::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw ParseError("malformed number", start);
    return Expr::number(v);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    for (auto [fname, kind] : kFunctions) {
      if (fname == name) {
        if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
        Expr arg = expr();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return Expr::unary(kind, arg);
      }
    }
    for (std::size_t i = 0; i < coords_.size(); ++i)
      if (coords_[i] == name) return Expr::variable(static_cast<int>(i), name);
    throw UnknownIdentifierError(name, start);
  }

  std::string_view src_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Number;
  n->number = value;
  return Expr(n);
}

Expr Expr::variable(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->index = index;
  n->name = std::move(name);
  return Expr(n);
}

Expr Expr::unary(ExprKind kind, Expr operand) {
  if (arity_of(kind) != 1) throw ShapeError("not a unary expression kind");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->child[0] = std::move(operand.node_);
  return Expr(n);
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  if (arity_of(kind) != 2) throw ShapeError("not a binary expression kind");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->child[0] = std::move(lhs.node_);
  n->child[1] = std::move(rhs.node_);
  return Expr(n);
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
int Expr::variable_index() const { return node_->index; }
const std::string& Expr::variable_name() const { return node_->name; }
std::size_t Expr::arity() const { return arity_of(node_->kind); }

Expr Expr::operand(std::size_t i) const {
  if (i >= arity()) throw ShapeError("operand index out of range");
  return Expr(node_->child[i]);
}

int Expr::max_variable() const {
  if (node_->kind == ExprKind::Variable) return node_->index;
  int m = -1;
  for (std::size_t i = 0; i < arity(); ++i) m = std::max(m, operand(i).max_variable());
  return m;
}

bool Expr::is_constant() const { return max_variable() < 0; }

Jet Expr::evaluate(std::span<const double> point, int order) const {
  if (!node_) throw Error("evaluating an empty expression");
  if (point.empty()) throw ShapeError("evaluation point is empty");
  return eval(*node_, point, order);
}

double Expr::value(std::span<const double> point) const { return evaluate(point, 0).value(); }

std::string Expr::to_string() const {
  std::string out;
  if (node_) print(*node_, out, 0);
  return out;
}

bool operator==(const Expr& a, const Expr& b) { return equal(a.node_.get(), b.node_.get()); }

Expr parse_expr(std::string_view source, std::span<const std::string> coordinates) {
  return Parser(source, coordinates).parse();
}

bool is_function_name(std::string_view name) {
  for (auto [fname, kind] : kFunctions)
    if (fname == name) return true;
  return false;
}

}  // namespace hamla
