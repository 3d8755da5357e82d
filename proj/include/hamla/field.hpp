#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamla/expr.hpp"
#include "hamla/jet.hpp"

namespace hamla {

inline constexpr int kDefaultJetOrder = 2;
inline constexpr int kMaxJetOrder = 4;

using Point = std::vector<double>;

/// Ordered, uniquely named local coordinates.
class Chart {
 public:
  explicit Chart(std::vector<std::string> coordinates);
  static std::shared_ptr<const Chart> make(std::vector<std::string> coordinates);

  int dim() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return names_; }
  int index_of(std::string_view name) const;
  Expr parse(std::string_view source) const { return parse_expr(source, names_); }

  friend bool operator==(const Chart& a, const Chart& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
};

using ChartPtr = std::shared_ptr<const Chart>;

enum class FieldKind { Scalar, Vector, OneForm, TwoForm, Bivector, Trivector, SectionA, SectionAStar, Table };

const char* kind_name(FieldKind kind);

// Strict upper-triangle storage for antisymmetric tensors.
std::size_t pair_count(int n);
std::size_t pair_index(int n, int i, int j);  // requires i < j
std::size_t triple_count(int n);
std::size_t triple_index(int n, int i, int j, int k);  // requires i < j < k

/// Jet-valued multi-component function on a chart. `depth` is the number of
/// derivatives the field consumes from its inputs: evaluating at order k
/// evaluates the underlying expressions at order k + depth.
class Field {
 public:
  using Fn = std::function<Jets(std::span<const double>, int)>;

  Field() = default;
  Field(ChartPtr chart, FieldKind kind, std::size_t components, int depth, Fn fn);

  static Field from_exprs(ChartPtr chart, FieldKind kind, std::vector<Expr> exprs);
  static Field from_strings(ChartPtr chart, FieldKind kind, const std::vector<std::string>& sources);
  static Field constant(ChartPtr chart, FieldKind kind, std::vector<double> values);
  static Field zero(ChartPtr chart, FieldKind kind, std::size_t components);

  bool valid() const noexcept { return static_cast<bool>(fn_); }
  const ChartPtr& chart() const noexcept { return chart_; }
  int dim() const { return chart_->dim(); }
  FieldKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return components_; }
  int depth() const noexcept { return depth_; }

  /// Component jets of the given order at p.
  Jets evaluate(std::span<const double> p, int order) const;
  /// Jets of order `ambient_order - depth()`; a configuration error if negative.
  Jets at(std::span<const double> p, int ambient_order) const;
  std::vector<double> values(std::span<const double> p, int ambient_order) const;

  Field retagged(FieldKind kind) const;
  Field component(std::size_t i) const;

 private:
  ChartPtr chart_;
  FieldKind kind_ = FieldKind::Table;
  std::size_t components_ = 0;
  int depth_ = 0;
  Fn fn_;
};

std::size_t expected_components(FieldKind kind, int n);

template <FieldKind K>
class TypedField : public Field {
 public:
  TypedField() = default;
  explicit TypedField(Field f);
};

using ScalarField = TypedField<FieldKind::Scalar>;
using VectorField = TypedField<FieldKind::Vector>;
using OneForm = TypedField<FieldKind::OneForm>;
using TwoForm = TypedField<FieldKind::TwoForm>;
using BivectorField = TypedField<FieldKind::Bivector>;
using TrivectorField = TypedField<FieldKind::Trivector>;
using SectionA = TypedField<FieldKind::SectionA>;
using SectionAStar = TypedField<FieldKind::SectionAStar>;

void require_same_chart(const Field& a, const Field& b, std::string_view op);

/// Pointwise combinator: inputs are evaluated at order + increment and `fn`
/// must return jets of `order`.
using CombineFn = std::function<Jets(const std::vector<Jets>& inputs, int order)>;
Field combine(ChartPtr chart, FieldKind kind, std::size_t components, std::vector<Field> inputs, int increment,
              CombineFn fn);
/// Input i is evaluated at order + increments[i].
Field combine(ChartPtr chart, FieldKind kind, std::size_t components, std::vector<Field> inputs,
              std::vector<int> increments, CombineFn fn);

Field add(const Field& a, const Field& b);
Field subtract(const Field& a, const Field& b);
Field scale(const Field& a, double s);
Field scale(const Field& a, const Field& scalar);
/// Stack scalar fields into a multi-component field.
Field stack(ChartPtr chart, FieldKind kind, const std::vector<Field>& scalars);

template <FieldKind K>
TypedField<K> operator+(const TypedField<K>& a, const TypedField<K>& b) {
  return TypedField<K>(add(a, b));
}
template <FieldKind K>
TypedField<K> operator-(const TypedField<K>& a, const TypedField<K>& b) {
  return TypedField<K>(subtract(a, b));
}
template <FieldKind K>
TypedField<K> operator-(const TypedField<K>& a) {
  return TypedField<K>(scale(a, -1.0));
}
template <FieldKind K>
TypedField<K> operator*(double s, const TypedField<K>& a) {
  return TypedField<K>(scale(a, s));
}
template <FieldKind K>
TypedField<K> operator*(const ScalarField& f, const TypedField<K>& a) {
  return TypedField<K>(scale(a, f));
}

ScalarField scalar_field(const ChartPtr& chart, std::string_view source);
VectorField vector_field(const ChartPtr& chart, const std::vector<std::string>& components);
OneForm one_form(const ChartPtr& chart, const std::vector<std::string>& components);
/// From a full matrix; entries must be antisymmetric at every point in `probe`.
BivectorField bivector_from_matrix(const ChartPtr& chart, const std::vector<std::vector<std::string>>& matrix,
                                   std::span<const Point> probe);
BivectorField bivector_from_upper(const ChartPtr& chart, const std::vector<std::string>& upper);

ScalarField coordinate_function(const ChartPtr& chart, int i);
VectorField coordinate_vector(const ChartPtr& chart, int i);
OneForm coordinate_differential(const ChartPtr& chart, int i);

// Signed entries of antisymmetric storage; zero jet on the diagonal.
Jet bivector_entry(const Jets& upper, int n, int i, int j, int jet_dim, int order);
Jet trivector_entry(const Jets& upper, int n, int i, int j, int k, int jet_dim, int order);
/// Dense n x n row-major matrix from upper-triangle storage.
Jets bivector_matrix(const Jets& upper, int n, int jet_dim, int order);

Jet zero_jet(int dim, int order);

}  // namespace hamla
