#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace hamla {

/// Enumeration of the multi-indices of total degree <= order in `dim`
/// variables, graded by degree and lexicographic within a degree. The layout
/// of order k-1 is a prefix of the layout of order k.
class JetLayout {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Shared, immutable layout. Thread-safe.
  static std::shared_ptr<const JetLayout> get(int dim, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degrees_.size(); }

  std::span<const int> multi_index(std::size_t k) const;
  int degree(std::size_t k) const { return degrees_[k]; }
  std::size_t find(std::span<const int> alpha) const;
  /// Index of alpha(k) + e_var, or npos when that exceeds the order.
  std::size_t shift(std::size_t k, int var) const {
    return shifts_[k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(var)];
  }
  std::span<const Product> products() const { return products_; }

  JetLayout(int dim, int order);

 private:
  int dim_;
  int order_;
  std::vector<int> indices_;  // size() * dim_
  std::vector<int> degrees_;
  std::vector<std::size_t> shifts_;
  std::vector<Product> products_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// Truncated multivariate Taylor polynomial at a point: value and all partial
/// derivatives of total order <= order(). Coefficients are stored as Taylor
/// coefficients f_alpha = d^alpha f / alpha!.
class Jet {
 public:
  Jet() = default;
  Jet(int dim, int order);

  static Jet constant(int dim, int order, double value);
  static Jet variable(int dim, int order, int var, double value);

  int dim() const noexcept { return layout_ ? layout_->dim() : 0; }
  int order() const noexcept { return layout_ ? layout_->order() : -1; }
  bool empty() const noexcept { return !layout_; }
  const JetLayout& layout() const { return *layout_; }

  double value() const { return coeffs_[0]; }
  /// Partial derivative d^|vars| f / dx_{vars[0]} ... dx_{vars[m-1]}.
  double partial(std::span<const int> vars) const;
  double partial(std::initializer_list<int> vars) const {
    return partial(std::span<const int>(vars.begin(), vars.size()));
  }
  double gradient(int var) const;
  double taylor_coefficient(std::span<const int> alpha) const;
  std::span<const double> coefficients() const { return coeffs_; }
  double& coefficient(std::size_t k) { return coeffs_[k]; }

  /// d/dx_var; the result has order() - 1.
  Jet derivative(int var) const;
  Jet truncated(int order) const;
  /// Same function viewed in `new_dim` variables; variable i maps to var_map[i].
  Jet embedded(int new_dim, std::span<const int> var_map) const;

  /// Largest absolute coefficient (Taylor-coefficient norm).
  double max_abs() const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

/// Elementary functions on jets (exact truncated composition).
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet tanh(const Jet& x);
Jet reciprocal(const Jet& x);
Jet pow(const Jet& base, int exponent);
Jet pow(const Jet& base, double exponent);

/// Compose with a univariate function given its Taylor coefficients at
/// x.value(): series[m] = phi^(m)(x0) / m!, m = 0..order.
Jet compose(const Jet& x, std::span<const double> series);

using Jets = std::vector<Jet>;

Jets truncated(const Jets& jets, int order);
double max_abs_value(const Jets& jets);

}  // namespace hamla
