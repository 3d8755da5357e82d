#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hamla/calculus.hpp"
#include "hamla/sampling.hpp"

namespace hamla::test {

inline constexpr int kOrder = 2;

inline std::vector<Point> points(int dim, std::size_t count, std::uint64_t seed, double lo = -1, double hi = 1) {
  return sample_box(SampleBox::cube(dim, lo, hi), count, seed);
}

inline std::vector<double> vals(const Field& f, const Point& p, int order = kOrder) { return f.values(p, order); }

inline double val(const Field& f, const Point& p, int order = kOrder) { return f.values(p, order).at(0); }

inline double max_abs(const Field& f, const Point& p, int order = kOrder) {
  double m = 0;
  for (double v : f.values(p, order)) m = std::max(m, std::abs(v));
  return m;
}

inline double max_diff(const Field& a, const Field& b, const Point& p, int order = kOrder) {
  auto x = a.values(p, order);
  auto y = b.values(p, order);
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y.at(i)));
  return x.size() == y.size() ? m : INFINITY;
}

}  // namespace hamla::test
