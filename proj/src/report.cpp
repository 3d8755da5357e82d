#include "hamla/report.hpp"

#include <algorithm>
#include <cmath>

namespace hamla {

void CheckReport::add(const Point& p, double residual, double scale) {
  points.push_back(p);
  residuals.push_back(residual);
  scales.push_back(std::max(1.0, scale));
}

void CheckReport::finalize() {
  max_residual = 0.0;
  max_scaled_residual = 0.0;
  worst_point.clear();
  pass = true;
  double worst = -1.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    double r = residuals[i];
    double s = r / scales[i];
    if (std::isnan(r)) s = r = INFINITY;
    max_residual = std::max(max_residual, r);
    max_scaled_residual = std::max(max_scaled_residual, s);
    if (s > worst) {
      worst = s;
      worst_point = points[i];
    }
    if (!(s <= tolerance)) pass = false;
  }
}

void CheckReport::metric_max(const std::string& key, double value) {
  auto it = metrics.find(key);
  if (it == metrics.end())
    metrics.emplace(key, value);
  else
    it->second = std::max(it->second, value);
}

}  // namespace hamla
