#include "hamla/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "hamla/errors.hpp"

namespace hamla {

namespace {

// Multi-indices of total degree `degree` in `dim` variables, lexicographically
// descending in the leading exponent (x0^d first).
void enumerate_degree(int dim, int degree, std::vector<int>& current, int var,
                      std::vector<int>& out) {
  if (var == dim - 1) {
    current[var] = degree;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    enumerate_degree(dim, degree - e, current, var + 1, out);
  }
  current[var] = 0;
}

std::uint64_t encode(std::span<const int> alpha, int order) {
  std::uint64_t key = 0;
  for (int a : alpha) key = key * static_cast<std::uint64_t>(order + 1) + static_cast<std::uint64_t>(a);
  return key;
}

}  // namespace

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw ShapeError("jet dimension must be at least 1");
  if (order < 0) throw ConfigurationError("jet order must be non-negative");
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  for (int d = 0; d <= order; ++d) {
    std::size_t before = indices_.size();
    enumerate_degree(dim, d, current, 0, indices_);
    std::size_t added = (indices_.size() - before) / static_cast<std::size_t>(dim);
    degrees_.insert(degrees_.end(), added, d);
  }

  lookup_.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) lookup_.emplace(encode(multi_index(k), order), k);

  shifts_.assign(size() * static_cast<std::size_t>(dim), npos);
  std::vector<int> alpha(static_cast<std::size_t>(dim));
  for (std::size_t k = 0; k < size(); ++k) {
    if (degrees_[k] == order) continue;
    auto mi = multi_index(k);
    for (int v = 0; v < dim; ++v) {
      std::copy(mi.begin(), mi.end(), alpha.begin());
      ++alpha[static_cast<std::size_t>(v)];
      shifts_[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v)] = lookup_.at(encode(alpha, order));
    }
  }

  for (std::size_t i = 0; i < size(); ++i) {
    auto ai = multi_index(i);
    for (std::size_t j = 0; j < size(); ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      auto aj = multi_index(j);
      for (int v = 0; v < dim; ++v) alpha[static_cast<std::size_t>(v)] = ai[static_cast<std::size_t>(v)] + aj[static_cast<std::size_t>(v)];
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(lookup_.at(encode(alpha, order)))});
    }
  }
}

std::shared_ptr<const JetLayout> JetLayout::get(int dim, int order) {
  thread_local std::shared_ptr<const JetLayout> last;
  if (last && last->dim() == dim && last->order() == order) return last;
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::make_shared<const JetLayout>(dim, order);
  last = slot;
  return slot;
}

std::span<const int> JetLayout::multi_index(std::size_t k) const {
  return std::span<const int>(indices_).subspan(k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
}

std::size_t JetLayout::find(std::span<const int> alpha) const {
  if (alpha.size() != static_cast<std::size_t>(dim_)) throw ShapeError("multi-index has wrong length");
  int total = 0;
  for (int a : alpha) {
    if (a < 0) return npos;
    total += a;
  }
  if (total > order_) return npos;
  auto hit = lookup_.find(encode(alpha, order_));
  return hit == lookup_.end() ? npos : hit->second;
}

Jet::Jet(int dim, int order) : layout_(JetLayout::get(dim, order)), coeffs_(layout_->size(), 0.0) {}

Jet Jet::constant(int dim, int order, double value) {
  Jet j(dim, order);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(int dim, int order, int var, double value) {
  if (var < 0 || var >= dim) throw ShapeError("variable index out of range");
  Jet j(dim, order);
  j.coeffs_[0] = value;
  if (order >= 1) j.coeffs_[j.layout_->shift(0, var)] = 1.0;
  return j;
}

double Jet::taylor_coefficient(std::span<const int> alpha) const {
  std::size_t k = layout_->find(alpha);
  if (k == JetLayout::npos) throw ConfigurationError("requested derivative exceeds jet order " + std::to_string(order()));
  return coeffs_[k];
}

double Jet::partial(std::span<const int> vars) const {
  std::vector<int> alpha(static_cast<std::size_t>(dim()), 0);
  for (int v : vars) {
    if (v < 0 || v >= dim()) throw ShapeError("partial derivative variable out of range");
    ++alpha[static_cast<std::size_t>(v)];
  }
  double factorial = 1.0;
  for (int a : alpha)
    for (int m = 2; m <= a; ++m) factorial *= m;
  return taylor_coefficient(alpha) * factorial;
}

double Jet::gradient(int var) const {
  if (order() < 1) throw ConfigurationError("gradient needs jet order >= 1");
  if (var < 0 || var >= dim()) throw ShapeError("gradient variable out of range");
  return coeffs_[layout_->shift(0, var)];
}

Jet Jet::derivative(int var) const {
  if (order() < 1) throw ConfigurationError("derivative needs jet order >= 1; increase jet_order");
  if (var < 0 || var >= dim()) throw ShapeError("derivative variable out of range");
  Jet out(dim(), order() - 1);
  for (std::size_t k = 0; k < out.coeffs_.size(); ++k) {
    std::size_t s = layout_->shift(k, var);
    out.coeffs_[k] = static_cast<double>(layout_->multi_index(k)[static_cast<std::size_t>(var)] + 1) * coeffs_[s];
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (order > this->order()) throw ConfigurationError("cannot raise jet order by truncation");
  if (order == this->order()) return *this;
  Jet out(dim(), order);
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

Jet Jet::embedded(int new_dim, std::span<const int> var_map) const {
  if (var_map.size() != static_cast<std::size_t>(dim())) throw ShapeError("embedding map has wrong length");
  Jet out(new_dim, order());
  std::vector<int> alpha(static_cast<std::size_t>(new_dim));
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    std::fill(alpha.begin(), alpha.end(), 0);
    auto mi = layout_->multi_index(k);
    for (std::size_t v = 0; v < mi.size(); ++v) alpha[static_cast<std::size_t>(var_map[v])] += mi[v];
    out.coeffs_[out.layout_->find(alpha)] += coeffs_[k];
  }
  return out;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

static void require_same(const Jet& a, const Jet& b) {
  if (a.empty() || b.empty()) throw ShapeError("operation on an empty jet");
  if (&a.layout() != &b.layout())
    throw ShapeError("jet shape mismatch: (dim " + std::to_string(a.dim()) + ", order " + std::to_string(a.order()) +
                     ") vs (dim " + std::to_string(b.dim()) + ", order " + std::to_string(b.order()) + ")");
}

Jet& Jet::operator+=(const Jet& other) {
  require_same(*this, other);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  require_same(*this, other);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  require_same(a, b);
  Jet out(a.dim(), a.order());
  const double* x = a.coeffs_.data();
  const double* y = b.coeffs_.data();
  double* z = out.coeffs_.data();
  for (const auto& p : a.layout_->products()) z[p.out] += x[p.lhs] * y[p.rhs];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet compose(const Jet& x, std::span<const double> series) {
  if (series.empty()) throw ShapeError("empty series in composition");
  Jet h = x;
  h.coefficient(0) = 0.0;
  int k = std::min<int>(x.order(), static_cast<int>(series.size()) - 1);
  Jet r = Jet::constant(x.dim(), x.order(), series[static_cast<std::size_t>(k)]);
  for (int m = k - 1; m >= 0; --m) {
    r = r * h;
    r += series[static_cast<std::size_t>(m)];
  }
  return r;
}

namespace {

std::vector<double> binomial_series(double x0, double p, int order) {
  // (x0 + h)^p = sum_m binom(p, m) x0^(p - m) h^m
  std::vector<double> s(static_cast<std::size_t>(order) + 1);
  double coef = 1.0;
  for (int m = 0; m <= order; ++m) {
    s[static_cast<std::size_t>(m)] = coef * std::pow(x0, p - m);
    coef *= (p - m) / (m + 1);
  }
  return s;
}

}  // namespace

Jet exp(const Jet& x) {
  std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
  double e = std::exp(x.value());
  double fact = 1.0;
  for (int m = 0; m <= x.order(); ++m) {
    if (m > 0) fact *= m;
    s[static_cast<std::size_t>(m)] = e / fact;
  }
  return compose(x, s);
}

Jet log(const Jet& x) {
  double x0 = x.value();
  if (!(x0 > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x0));
  std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
  s[0] = std::log(x0);
  for (int m = 1; m <= x.order(); ++m) s[static_cast<std::size_t>(m)] = ((m % 2) ? 1.0 : -1.0) / (m * std::pow(x0, m));
  return compose(x, s);
}

Jet sqrt(const Jet& x) {
  double x0 = x.value();
  if (!(x0 > 0.0)) throw DomainError("sqrt of non-positive value " + std::to_string(x0));
  return compose(x, binomial_series(x0, 0.5, x.order()));
}

static Jet trig(const Jet& x, int phase) {
  double sv = std::sin(x.value());
  double cv = std::cos(x.value());
  const double cycle[4] = {sv, cv, -sv, -cv};
  std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
  double fact = 1.0;
  for (int m = 0; m <= x.order(); ++m) {
    if (m > 0) fact *= m;
    s[static_cast<std::size_t>(m)] = cycle[(m + phase) % 4] / fact;
  }
  return compose(x, s);
}

Jet sin(const Jet& x) { return trig(x, 0); }
Jet cos(const Jet& x) { return trig(x, 1); }

Jet tanh(const Jet& x) {
  int k = x.order();
  std::vector<double> t(static_cast<std::size_t>(k) + 1, 0.0);
  t[0] = std::tanh(x.value());
  // t' = 1 - t^2 as power series
  for (int m = 0; m < k; ++m) {
    double conv = 0.0;
    for (int j = 0; j <= m; ++j) conv += t[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(m - j)];
    t[static_cast<std::size_t>(m) + 1] = ((m == 0 ? 1.0 : 0.0) - conv) / (m + 1);
  }
  return compose(x, t);
}

Jet reciprocal(const Jet& x) {
  double x0 = x.value();
  if (x0 == 0.0) throw DomainError("division by zero");
  std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
  double p = 1.0 / x0;
  for (int m = 0; m <= x.order(); ++m) {
    s[static_cast<std::size_t>(m)] = (m % 2 ? -p : p);
    p /= x0;
  }
  return compose(x, s);
}

Jet pow(const Jet& base, int exponent) {
  if (exponent < 0) return reciprocal(pow(base, -exponent));
  Jet result = Jet::constant(base.dim(), base.order(), 1.0);
  Jet b = base;
  unsigned e = static_cast<unsigned>(exponent);
  while (e) {
    if (e & 1u) result = result * b;
    e >>= 1u;
    if (e) b = b * b;
  }
  return result;
}

Jet pow(const Jet& base, double exponent) {
  if (std::nearbyint(exponent) == exponent && std::abs(exponent) < 1e9) return pow(base, static_cast<int>(exponent));
  double x0 = base.value();
  if (!(x0 > 0.0)) throw DomainError("non-integer power of non-positive value " + std::to_string(x0));
  return compose(base, binomial_series(x0, exponent, base.order()));
}

Jets truncated(const Jets& jets, int order) {
  Jets out;
  out.reserve(jets.size());
  for (const auto& j : jets) out.push_back(j.truncated(order));
  return out;
}

double max_abs_value(const Jets& jets) {
  double m = 0.0;
  for (const auto& j : jets) m = std::max(m, std::abs(j.value()));
  return m;
}

}  // namespace hamla
