#include "hamla/field.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "hamla/errors.hpp"

namespace hamla {

Chart::Chart(std::vector<std::string> coordinates) : names_(std::move(coordinates)) {
  if (names_.empty()) throw ShapeError("a chart needs at least one coordinate");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw ShapeError("empty coordinate name");
    if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
      throw ShapeError("coordinate name '" + name + "' must start with a letter");
    for (char c : name)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
        throw ShapeError("coordinate name '" + name + "' contains '" + c + "'");
    if (is_function_name(name)) throw ShapeError("coordinate name '" + name + "' is a function name");
    if (!seen.insert(name).second) throw ShapeError("duplicate coordinate name '" + name + "'");
  }
}

std::shared_ptr<const Chart> Chart::make(std::vector<std::string> coordinates) {
  return std::make_shared<const Chart>(std::move(coordinates));
}

int Chart::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

const char* kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::Scalar: return "scalar field";
    case FieldKind::Vector: return "vector field";
    case FieldKind::OneForm: return "one-form";
    case FieldKind::TwoForm: return "two-form";
    case FieldKind::Bivector: return "bivector field";
    case FieldKind::Trivector: return "trivector field";
    case FieldKind::SectionA: return "section of A";
    case FieldKind::SectionAStar: return "section of A*";
    case FieldKind::Table: return "component table";
  }
  return "field";
}

std::size_t pair_count(int n) { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2; }

std::size_t pair_index(int n, int i, int j) {
  // rows 0..i-1 contribute (n-1) + (n-2) + ... + (n-i)
  return static_cast<std::size_t>(i * n - i * (i + 1) / 2 + (j - i - 1));
}

std::size_t triple_count(int n) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(n - 2) / 6;
}

std::size_t triple_index(int n, int i, int j, int k) {
  std::size_t idx = 0;
  for (int a = 0; a < i; ++a) idx += pair_count(n - a - 1);
  return idx + pair_index(n - i - 1, j - i - 1, k - i - 1);
}

std::size_t expected_components(FieldKind kind, int n) {
  switch (kind) {
    case FieldKind::Scalar: return 1;
    case FieldKind::Vector:
    case FieldKind::OneForm: return static_cast<std::size_t>(n);
    case FieldKind::TwoForm:
    case FieldKind::Bivector: return pair_count(n);
    case FieldKind::Trivector: return n >= 3 ? triple_count(n) : 0;
    default: return static_cast<std::size_t>(-1);
  }
}

Field::Field(ChartPtr chart, FieldKind kind, std::size_t components, int depth, Fn fn)
    : chart_(std::move(chart)), kind_(kind), components_(components), depth_(depth), fn_(std::move(fn)) {
  if (!chart_) throw ShapeError("field without chart");
}

Field Field::from_exprs(ChartPtr chart, FieldKind kind, std::vector<Expr> exprs) {
  int n = chart->dim();
  for (const auto& e : exprs)
    if (e.max_variable() >= n) throw ShapeError("expression refers to a coordinate outside the chart");
  std::size_t m = exprs.size();
  return Field(std::move(chart), kind, m, 0, [exprs = std::move(exprs)](std::span<const double> p, int order) {
    Jets out;
    out.reserve(exprs.size());
    for (const auto& e : exprs) out.push_back(e.evaluate(p, order));
    return out;
  });
}

Field Field::from_strings(ChartPtr chart, FieldKind kind, const std::vector<std::string>& sources) {
  std::vector<Expr> exprs;
  exprs.reserve(sources.size());
  for (const auto& s : sources) exprs.push_back(chart->parse(s));
  return from_exprs(std::move(chart), kind, std::move(exprs));
}

Field Field::constant(ChartPtr chart, FieldKind kind, std::vector<double> values) {
  std::size_t m = values.size();
  return Field(std::move(chart), kind, m, 0, [values = std::move(values)](std::span<const double> p, int order) {
    Jets out;
    out.reserve(values.size());
    for (double v : values) out.push_back(Jet::constant(static_cast<int>(p.size()), order, v));
    return out;
  });
}

Field Field::zero(ChartPtr chart, FieldKind kind, std::size_t components) {
  return constant(std::move(chart), kind, std::vector<double>(components, 0.0));
}

Jets Field::evaluate(std::span<const double> p, int order) const {
  if (!fn_) throw Error("evaluating an empty field");
  if (p.size() != static_cast<std::size_t>(chart_->dim()))
    throw ShapeError("point has dimension " + std::to_string(p.size()) + ", chart has " + std::to_string(chart_->dim()));
  if (order < 0) throw ConfigurationError("negative jet order requested");
  if (order + depth_ > kMaxJetOrder + 4) throw ConfigurationError("jet order too large");
  return fn_(p, order);
}

Jets Field::at(std::span<const double> p, int ambient_order) const {
  if (ambient_order < depth_)
    throw ConfigurationError("this quantity needs " + std::to_string(depth_) + " derivatives but jet_order is " +
                             std::to_string(ambient_order) + "; increase jet_order");
  return evaluate(p, ambient_order - depth_);
}

std::vector<double> Field::values(std::span<const double> p, int ambient_order) const {
  Jets jets = at(p, ambient_order);
  std::vector<double> out(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
  return out;
}

Field Field::retagged(FieldKind kind) const {
  Field f = *this;
  f.kind_ = kind;
  return f;
}

Field Field::component(std::size_t i) const {
  if (i >= components_) throw ShapeError("component index out of range");
  return combine(chart_, FieldKind::Scalar, 1, {*this}, 0,
                 [i](const std::vector<Jets>& in, int) { return Jets{in[0][i]}; });
}

template <FieldKind K>
TypedField<K>::TypedField(Field f) : Field(f.retagged(K)) {
  if (f.kind() != K && f.kind() != FieldKind::Table)
    throw ShapeError(std::string("expected a ") + kind_name(K) + ", got a " + kind_name(f.kind()));
  std::size_t want = expected_components(K, f.dim());
  if (want != static_cast<std::size_t>(-1) && f.size() != want)
    throw ShapeError(std::string(kind_name(K)) + " on a " + std::to_string(f.dim()) + "-dimensional chart needs " +
                     std::to_string(want) + " components, got " + std::to_string(f.size()));
}

template class TypedField<FieldKind::Scalar>;
template class TypedField<FieldKind::Vector>;
template class TypedField<FieldKind::OneForm>;
template class TypedField<FieldKind::TwoForm>;
template class TypedField<FieldKind::Bivector>;
template class TypedField<FieldKind::Trivector>;
template class TypedField<FieldKind::SectionA>;
template class TypedField<FieldKind::SectionAStar>;

void require_same_chart(const Field& a, const Field& b, std::string_view op) {
  if (a.chart() != b.chart() && !(*a.chart() == *b.chart()))
    throw ShapeError(std::string(op) + ": fields live on different charts");
}

Field combine(ChartPtr chart, FieldKind kind, std::size_t components, std::vector<Field> inputs, int increment,
              CombineFn fn) {
  std::vector<int> increments(inputs.size(), increment);
  return combine(std::move(chart), kind, components, std::move(inputs), std::move(increments), std::move(fn));
}

Field combine(ChartPtr chart, FieldKind kind, std::size_t components, std::vector<Field> inputs,
              std::vector<int> increments, CombineFn fn) {
  if (increments.size() != inputs.size()) throw ShapeError("combine: one increment per input");
  int depth = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!(*inputs[i].chart() == *chart)) throw ShapeError(std::string("chart mismatch building a ") + kind_name(kind));
    depth = std::max(depth, inputs[i].depth() + increments[i]);
  }
  return Field(std::move(chart), kind, components, depth,
               [inputs = std::move(inputs), increments = std::move(increments), fn = std::move(fn),
                components](std::span<const double> p, int order) {
                 std::vector<Jets> in;
                 in.reserve(inputs.size());
                 for (std::size_t i = 0; i < inputs.size(); ++i) in.push_back(inputs[i].evaluate(p, order + increments[i]));
                 Jets out = fn(in, order);
                 if (out.size() != components) throw ShapeError("combinator produced the wrong number of components");
                 return out;
               });
}

static void require_same_shape(const Field& a, const Field& b, const char* op) {
  require_same_chart(a, b, op);
  if (a.size() != b.size())
    throw ShapeError(std::string(op) + ": component counts differ (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
}

Field add(const Field& a, const Field& b) {
  require_same_shape(a, b, "add");
  return combine(a.chart(), a.kind(), a.size(), {a, b}, 0, [](const std::vector<Jets>& in, int) {
    Jets out = in[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[1][i];
    return out;
  });
}

Field subtract(const Field& a, const Field& b) {
  require_same_shape(a, b, "subtract");
  return combine(a.chart(), a.kind(), a.size(), {a, b}, 0, [](const std::vector<Jets>& in, int) {
    Jets out = in[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= in[1][i];
    return out;
  });
}

Field scale(const Field& a, double s) {
  return combine(a.chart(), a.kind(), a.size(), {a}, 0, [s](const std::vector<Jets>& in, int) {
    Jets out = in[0];
    for (auto& j : out) j *= s;
    return out;
  });
}

Field scale(const Field& a, const Field& scalar) {
  require_same_chart(a, scalar, "scale");
  if (scalar.size() != 1) throw ShapeError("scale: multiplier must be a scalar field");
  return combine(a.chart(), a.kind(), a.size(), {a, scalar}, 0, [](const std::vector<Jets>& in, int) {
    Jets out;
    out.reserve(in[0].size());
    for (const auto& j : in[0]) out.push_back(j * in[1][0]);
    return out;
  });
}

Field stack(ChartPtr chart, FieldKind kind, const std::vector<Field>& scalars) {
  for (const auto& s : scalars)
    if (s.size() != 1) throw ShapeError("stack expects scalar fields");
  return combine(std::move(chart), kind, scalars.size(), scalars, 0, [](const std::vector<Jets>& in, int) {
    Jets out;
    out.reserve(in.size());
    for (const auto& j : in) out.push_back(j[0]);
    return out;
  });
}

ScalarField scalar_field(const ChartPtr& chart, std::string_view source) {
  return ScalarField(Field::from_exprs(chart, FieldKind::Scalar, {chart->parse(source)}));
}

VectorField vector_field(const ChartPtr& chart, const std::vector<std::string>& components) {
  return VectorField(Field::from_strings(chart, FieldKind::Vector, components));
}

OneForm one_form(const ChartPtr& chart, const std::vector<std::string>& components) {
  return OneForm(Field::from_strings(chart, FieldKind::OneForm, components));
}

BivectorField bivector_from_matrix(const ChartPtr& chart, const std::vector<std::vector<std::string>>& matrix,
                                   std::span<const Point> probe) {
  int n = chart->dim();
  if (matrix.size() != static_cast<std::size_t>(n)) throw ShapeError("bivector matrix must have one row per coordinate");
  std::vector<std::vector<Expr>> e(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (matrix[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(n))
      throw ShapeError("bivector matrix row " + std::to_string(i) + " has the wrong length");
    for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(i)].push_back(chart->parse(matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
  }
  for (const auto& p : probe) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double a = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value(p);
        double b = e[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)].value(p);
        if (std::abs(a + b) > 1e-12 * std::max(1.0, std::abs(a)))
          throw ValidationError("bivector matrix is not antisymmetric in entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")",
                                p);
      }
    }
  }
  std::vector<Expr> upper;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) upper.push_back(e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return BivectorField(Field::from_exprs(chart, FieldKind::Bivector, std::move(upper)));
}

BivectorField bivector_from_upper(const ChartPtr& chart, const std::vector<std::string>& upper) {
  return BivectorField(Field::from_strings(chart, FieldKind::Bivector, upper));
}

ScalarField coordinate_function(const ChartPtr& chart, int i) {
  return ScalarField(Field::from_exprs(chart, FieldKind::Scalar, {Expr::variable(i, chart->coordinates().at(static_cast<std::size_t>(i)))}));
}

VectorField coordinate_vector(const ChartPtr& chart, int i) {
  std::vector<double> v(static_cast<std::size_t>(chart->dim()), 0.0);
  v.at(static_cast<std::size_t>(i)) = 1.0;
  return VectorField(Field::constant(chart, FieldKind::Vector, std::move(v)));
}

OneForm coordinate_differential(const ChartPtr& chart, int i) {
  std::vector<double> v(static_cast<std::size_t>(chart->dim()), 0.0);
  v.at(static_cast<std::size_t>(i)) = 1.0;
  return OneForm(Field::constant(chart, FieldKind::OneForm, std::move(v)));
}

Jet zero_jet(int dim, int order) { return Jet(dim, order); }

Jet bivector_entry(const Jets& upper, int n, int i, int j, int jet_dim, int order) {
  if (i == j) return zero_jet(jet_dim, order);
  if (i < j) return upper[pair_index(n, i, j)];
  return -upper[pair_index(n, j, i)];
}

Jet trivector_entry(const Jets& upper, int n, int i, int j, int k, int jet_dim, int order) {
  if (i == j || j == k || i == k) return zero_jet(jet_dim, order);
  int idx[3] = {i, j, k};
  int sign = 1;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 2 - a; ++b)
      if (idx[b] > idx[b + 1]) {
        std::swap(idx[b], idx[b + 1]);
        sign = -sign;
      }
  Jet out = upper[triple_index(n, idx[0], idx[1], idx[2])];
  if (sign < 0) out *= -1.0;
  return out;
}

Jets bivector_matrix(const Jets& upper, int n, int jet_dim, int order) {
  Jets m;
  m.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.push_back(bivector_entry(upper, n, i, j, jet_dim, order));
  return m;
}

}  // namespace hamla
