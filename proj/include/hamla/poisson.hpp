#pragma once

#include <memory>
#include <span>

#include "hamla/calculus.hpp"

namespace hamla {

struct Worst {
  double value = 0.0;
  Point point;
};

/// A chart with a bivector that is checked (never assumed) to be Poisson.
class PoissonChart {
 public:
  explicit PoissonChart(BivectorField pi);
  static std::shared_ptr<const PoissonChart> make(BivectorField pi) {
    return std::make_shared<const PoissonChart>(std::move(pi));
  }

  const ChartPtr& chart() const noexcept { return pi_.chart(); }
  int dim() const { return pi_.dim(); }
  const BivectorField& pi() const noexcept { return pi_; }

  /// [Pi, Pi]
  TrivectorField jacobiator() const { return schouten(pi_, pi_); }
  /// max over points of the largest component of [Pi, Pi].
  Worst jacobi_residual(std::span<const Point> points, int order) const;
  /// Throws ValidationError naming the worst point when the residual exceeds tol.
  void validate(std::span<const Point> points, int order, double tol) const;

 private:
  BivectorField pi_;
};

using PoissonChartPtr = std::shared_ptr<const PoissonChart>;

}  // namespace hamla
