#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hamla/field.hpp"

namespace hamla {

inline constexpr double kDefaultTolerance = 1e-9;

/// Per-point residuals of one check. A point passes when its residual is at
/// most tolerance * scale, where scale guards against large input magnitudes.
struct CheckReport {
  std::string name;
  double tolerance = kDefaultTolerance;
  std::uint64_t seed = 0;
  std::vector<Point> points;
  std::vector<double> residuals;
  std::vector<double> scales;

  double max_residual = 0.0;
  double max_scaled_residual = 0.0;
  bool pass = true;
  Point worst_point;

  std::map<std::string, double> metrics;
  std::vector<std::string> notes;

  void add(const Point& p, double residual, double scale = 1.0);
  /// Recomputes max_residual, max_scaled_residual, worst_point and pass.
  void finalize();
  /// Max over metric values stored under `key`, keeping the larger.
  void metric_max(const std::string& key, double value);
};

}  // namespace hamla
