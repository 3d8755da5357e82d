#include "hamla/poisson.hpp"

#include <cstdio>

#include "hamla/errors.hpp"

namespace hamla {

PoissonChart::PoissonChart(BivectorField pi) : pi_(std::move(pi)) {
  if (!pi_.valid()) throw ShapeError("Poisson chart needs a bivector");
}

Worst PoissonChart::jacobi_residual(std::span<const Point> points, int order) const {
  Worst w;
  if (dim() < 3) return w;
  TrivectorField t = jacobiator();
  for (const auto& p : points) {
    double r = max_abs_at(t, p, order);
    if (r > w.value || w.point.empty()) {
      w.value = std::max(w.value, r);
      w.point = p;
    }
  }
  return w;
}

void PoissonChart::validate(std::span<const Point> points, int order, double tol) const {
  Worst w = jacobi_residual(points, order);
  if (w.value > tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", w.value);
    throw ValidationError(std::string("bivector is not Poisson: |[Pi,Pi]| = ") + buf, w.point);
  }
}

}  // namespace hamla
