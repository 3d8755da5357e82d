#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hamla/dualspace.hpp"
#include "hamla/errors.hpp"

namespace hamla {

inline constexpr int kReportSchemaVersion = 1;

/// Expected outcome of one check. `max_residual` and `metrics` are compared
/// within `within`.
struct Expectation {
  std::optional<bool> pass;
  std::optional<double> max_residual;
  std::map<std::string, double> metrics;
  double within = 1e-9;
};

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jet_order;
  std::optional<double> tolerance;
};

/// Parsed and validated scenario. Fields are built eagerly; optional parts
/// are absent when the document does not declare them.
struct Scenario {
  std::string name;
  std::string description;
  std::string source;  // the TOML text
  int jet_order = kDefaultJetOrder;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = kDefaultTolerance;
  std::map<std::string, double> tolerance_overrides;

  ChartPtr chart;
  PoissonChartPtr poisson;
  AlgebroidPtr algebroid;
  std::optional<Connection> connection;
  std::optional<Field> momentum;  // raw components of a section of A*
  std::optional<OneForm> eta;
  std::optional<OneForm> eta_bar;
  std::optional<VectorField> symplectic_n;
  std::optional<Point> coisotropy_point;
  double coisotropy_delta = 1e-6;
  double fiber_lo = -1.0;
  double fiber_hi = 1.0;
  std::size_t pointwise_points = 20;

  std::vector<Point> points;
  std::vector<std::string> checks;
  std::map<std::string, Expectation> expect;

  double tolerance_for(const std::string& check) const;
};

/// Names accepted in [checks] run.
const std::vector<std::string>& known_checks();

Scenario parse_scenario(std::string_view toml_text, const std::string& source_name = "<scenario>",
                        const ScenarioOverrides& overrides = {});
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

struct CheckOutcome {
  std::string name;
  CheckReport report;
  std::optional<std::string> error;
  Point error_point;  // empty when unknown
  std::optional<Expectation> expected;
  bool expectation_met = true;
};

struct Report {
  std::string scenario;
  std::string digest;  // of the scenario text
  std::uint64_t seed = 0;
  int jet_order = kDefaultJetOrder;
  std::size_t point_count = 0;
  std::vector<CheckOutcome> checks;
  bool verdict = true;  // every check passed
  bool expectations_met = true;
  bool evaluation_error = false;
  double wall_time = 0.0;
};

Report run_checks(const Scenario& s);
/// Runs one named check; throws hamla::Error on evaluation failure.
CheckReport run_check(const Scenario& s, const std::string& name);

enum class ReportFormat { Json, Text };
std::string emit_report(const Report& r, ReportFormat format);
/// 0 when every expectation holds, 1 on a mismatch, 2 on an evaluation error.
int exit_code(const Report& r);

struct GalleryEntry {
  std::string name;
  std::string summary;
  std::string toml;
};

const std::vector<GalleryEntry>& gallery();
/// nullptr when absent.
const GalleryEntry* find_gallery(std::string_view name);

}  // namespace hamla
