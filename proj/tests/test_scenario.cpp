#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hamla/scenario.hpp"

using namespace hamla;
using json = nlohmann::json;

namespace {

const char* kMinimal = R"toml(name = "minimal"

[chart]
coordinates = ["x", "y", "z"]

[poisson]
upper = ["1", "0", "0"]

[algebroid]
kind = "cotangent"

[momentum]
components = ["-x", "-y", "0"]

[sampling]
count = 8
seed = 3

[checks]
run = ["H1", "H2", "H3"]

[expect]
H3 = false
)toml";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  if (at != std::string::npos) s.replace(at, from.size(), to);
  return s;
}

std::string schema_path(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

json report_json(const Scenario& s) {
  json j = json::parse(emit_report(run_checks(s), ReportFormat::Json));
  j.erase("wall_time");
  return j;
}

const json& check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return c;
  throw std::runtime_error("no check " + name);
}

}  // namespace

TEST(Gallery, EveryScenarioMeetsItsExpectations) {
  EXPECT_GE(gallery().size(), 8u);
  for (const auto& e : gallery()) {
    Scenario s = parse_scenario(e.toml, e.name);
    EXPECT_EQ(s.name, e.name);
    Report r = run_checks(s);
    EXPECT_EQ(exit_code(r), 0) << e.name << "\n" << emit_report(r, ReportFormat::Text);
  }
  EXPECT_EQ(find_gallery("nope"), nullptr);
}

TEST(Gallery, GoldenValues) {
  auto run = [](const char* name) { return report_json(parse_scenario(find_gallery(name)->toml, name)); };
  auto zero = run("zeromu");
  EXPECT_NEAR(check(zero, "H3")["max_residual"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(check(zero, "liouville")["max_residual"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(check(zero, "H2")["pass"], true);
  EXPECT_LE(check(zero, "H3")["metrics"]["form_gap"].get<double>(), 1e-9);

  auto shifted = run("zeromu_shifted");
  EXPECT_NEAR(check(shifted, "H3")["max_residual"].get<double>(), 1.0, 1e-9);

  auto r4 = run("r4_nonpoisson");
  EXPECT_NEAR(check(r4, "poisson")["max_residual"].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(check(r4, "poisson")["metrics"]["schouten_234"].get<double>(), -2.0, 1e-9);

  auto xdx = run("x_dx_action");
  EXPECT_GE(check(xdx, "H1")["max_residual"].get<double>(), 0.9);

  auto so3 = run("so3_liepoisson");
  EXPECT_EQ(so3["verdict"], "PASS");
  for (const auto& c : so3["checks"]) EXPECT_LE(c["max_residual"].get<double>(), 1e-9) << c["name"];

  auto dar = run("darboux_local");
  EXPECT_EQ(check(dar, "liouville")["metrics"]["eta_residual"].get<double>(), 0.0);
  EXPECT_LE(check(dar, "momentum_connection")["metrics"]["h2"].get<double>(), 1e-8);
}

TEST(Report, DeterministicGivenSeed) {
  Scenario s = parse_scenario(kMinimal);
  EXPECT_EQ(report_json(s), report_json(s));
  EXPECT_EQ(report_json(parse_scenario(kMinimal)), report_json(s));
  Scenario other = parse_scenario(kMinimal, "m", ScenarioOverrides{9, std::nullopt, std::nullopt});
  EXPECT_NE(s.points, other.points);
  EXPECT_EQ(other.seed, 9u);
}

TEST(Report, JsonShape) {
  Scenario s = parse_scenario(kMinimal);
  Report r = run_checks(s);
  json j = json::parse(emit_report(r, ReportFormat::Json));
  for (const char* key : {"scenario", "digest", "seed", "jet_order", "points", "checks", "verdict", "expectations_met",
                          "evaluation_error", "tool_version", "schema_version", "wall_time"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["points"], 8);
  EXPECT_EQ(j["verdict"], "FAIL");
  EXPECT_EQ(j["expectations_met"], true);
  ASSERT_EQ(j["checks"].size(), 3u);
  const auto& h3 = check(j, "H3");
  EXPECT_EQ(h3["pass"], false);
  EXPECT_EQ(h3["worst_point"].size(), 3u);
  EXPECT_EQ(h3["expected"]["pass"], false);
  EXPECT_TRUE(h3["error"].is_null());
  EXPECT_EQ(j["digest"].get<std::string>().size(), 16u);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Report, TextHasOneRowPerCheck) {
  Scenario s = parse_scenario(kMinimal);
  std::string text = emit_report(run_checks(s), ReportFormat::Text);
  std::istringstream in(text);
  std::string line;
  int rows = 0;
  bool worst = false, verdict = false;
  while (std::getline(in, line)) {
    for (const char* c : {"H1 ", "H2 ", "H3 "})
      if (line.rfind(c, 0) == 0) ++rows;
    if (line.find("worst at") != std::string::npos) worst = true;
    if (line.rfind("verdict FAIL  expectations met", 0) == 0) verdict = true;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(worst);
  EXPECT_TRUE(verdict);
}

TEST(Report, MismatchedExpectationExitsOne) {
  Scenario s = parse_scenario(replace(kMinimal, "H3 = false", "H3 = true"));
  Report r = run_checks(s);
  EXPECT_FALSE(r.expectations_met);
  EXPECT_EQ(exit_code(r), 1);
  EXPECT_NE(emit_report(r, ReportFormat::Text).find("MISMATCH"), std::string::npos);
}

TEST(Report, EvaluationErrorExitsTwoWithPoint) {
  std::string text = replace(kMinimal, R"(components = ["-x", "-y", "0"])", "components = [\"-x\", \"-y\", \"log(x)\"]");
  text = replace(text, "[expect]\nH3 = false\n", "");
  Scenario s = parse_scenario(text);
  Report r = run_checks(s);
  EXPECT_TRUE(r.evaluation_error);
  EXPECT_EQ(exit_code(r), 2);
  bool found = false;
  for (const auto& c : r.checks)
    if (c.error) {
      found = true;
      ASSERT_EQ(c.error_point.size(), 3u);
      EXPECT_LE(c.error_point[0], 0.0);
    }
  EXPECT_TRUE(found);
  json j = json::parse(emit_report(r, ReportFormat::Json));
  EXPECT_FALSE(check(j, "H2")["error"].is_null());
}

TEST(Scenario, EmptyCheckListPasses) {
  Scenario s = parse_scenario(replace(replace(kMinimal, R"(run = ["H1", "H2", "H3"])", "run = []"), "H3 = false", ""));
  Report r = run_checks(s);
  EXPECT_TRUE(r.checks.empty());
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Scenario, Overrides) {
  Scenario s = parse_scenario(kMinimal, "m", ScenarioOverrides{std::nullopt, 3, 1e-6});
  EXPECT_EQ(s.jet_order, 3);
  EXPECT_EQ(s.tolerance, 1e-6);
  EXPECT_EQ(s.tolerance_for("H1"), 1e-6);
  EXPECT_EQ(exit_code(run_checks(s)), 0);
  EXPECT_THROW(parse_scenario(kMinimal, "m", ScenarioOverrides{std::nullopt, 5, std::nullopt}), SchemaError);
  EXPECT_THROW(parse_scenario(kMinimal, "m", ScenarioOverrides{std::nullopt, std::nullopt, -1.0}), SchemaError);
}

TEST(Scenario, TolerancesAndSampling) {
  std::string text = replace(kMinimal, "[checks]", "[tolerance]\ndefault = 1e-7\nH2 = 1e-3\n\n[checks]");
  text = replace(text, "count = 8\nseed = 3", "count = 4\nseed = 3\npoints = [[0.0, 0.0, 1.0]]");
  Scenario s = parse_scenario(text);
  EXPECT_EQ(s.tolerance_for("H1"), 1e-7);
  EXPECT_EQ(s.tolerance_for("H2"), 1e-3);
  EXPECT_EQ(s.tolerance_for("coisotropy"), 1e-7);
  ASSERT_EQ(s.points.size(), 5u);
  EXPECT_EQ(s.points[0], (Point{0.0, 0.0, 1.0}));
}

TEST(Scenario, SchemaErrorsNameTheField) {
  EXPECT_EQ(schema_path(replace(kMinimal, "[chart]\ncoordinates = [\"x\", \"y\", \"z\"]\n", "")), "chart");
  EXPECT_EQ(schema_path(replace(kMinimal, "name = \"minimal\"", "")), "name");
  EXPECT_EQ(schema_path(replace(kMinimal, "[chart]", "colour = 1\n[chart]")), "colour");
  EXPECT_EQ(schema_path(replace(kMinimal, "kind = \"cotangent\"", "kind = \"cotangent\"\nfoo = 2")), "algebroid.foo");
  EXPECT_EQ(schema_path(replace(kMinimal, R"(upper = ["1", "0", "0"])", R"(upper = ["1", "0 +", "0"])")),
            "poisson.upper[1]");
  EXPECT_EQ(schema_path(replace(kMinimal, R"(upper = ["1", "0", "0"])", R"(upper = ["1", "w", "0"])")),
            "poisson.upper[1]");
  EXPECT_EQ(schema_path(replace(kMinimal, R"(upper = ["1", "0", "0"])", R"(upper = ["1", "0"])")), "poisson.upper");
  EXPECT_EQ(schema_path(replace(kMinimal, R"("H1", "H2", "H3")", R"("H1", "H9")")), "checks.run[1]");
  EXPECT_EQ(schema_path(replace(kMinimal, R"("H1", "H2", "H3")", R"("H1", "H1", "H3")")), "checks.run[1]");
  EXPECT_EQ(schema_path(replace(kMinimal, "H3 = false", "poisson = true")), "expect.poisson");
  EXPECT_EQ(schema_path(replace(replace(kMinimal, R"("H1", "H2", "H3")", R"("H1", "symplectic_suite")"), "H3 = false", "")),
            "checks.run");
  EXPECT_EQ(schema_path(replace(kMinimal, "[momentum]\ncomponents = [\"-x\", \"-y\", \"0\"]\n", "")), "<no error>");
  EXPECT_EQ(schema_path(replace(kMinimal, "count = 8", "count = \"8\"")), "sampling.count");
  EXPECT_EQ(schema_path(replace(kMinimal, "[chart]", "jet_order = 9\n[chart]")), "jet_order");
  EXPECT_EQ(schema_path("name = [\n"), "");
  try {
    parse_scenario(replace(kMinimal, R"(upper = ["1", "0", "0"])", R"(upper = ["1", "w", "0"])"));
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos);
  }
}

TEST(Scenario, NonAntisymmetricMatrixIsAValidationError) {
  std::string text = replace(kMinimal, R"(upper = ["1", "0", "0"])",
                             R"(matrix = [["0", "1", "0"], ["1", "0", "0"], ["0", "0", "0"]])");
  EXPECT_THROW(parse_scenario(text), ValidationError);
}

TEST(Scenario, LoadsExportedFile) {
  auto path = std::filesystem::temp_directory_path() / "hamla_test_export.toml";
  {
    std::ofstream out(path);
    out << find_gallery("so3_coadjoint_action")->toml;
  }
  Scenario s = load_scenario(path.string());
  EXPECT_EQ(s.name, "so3_coadjoint_action");
  EXPECT_EQ(exit_code(run_checks(s)), 0);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path.string()), Error);
}

TEST(Scenario, ConnectionTableEntries) {
  const auto* e = find_gallery("lie_algebra_bundle_so3");
  Scenario s = parse_scenario(e->toml);
  ASSERT_TRUE(s.connection);
  auto g = s.connection->coefficients().values(Point{0.1, 0.2}, 0);
  EXPECT_EQ(g[Connection::index(3, 0, 2, 1)], 1.0);
  EXPECT_EQ(g[Connection::index(3, 0, 1, 2)], -1.0);
  EXPECT_EQ(g[Connection::index(3, 1, 2, 0)], -1.0);
  EXPECT_EQ(g[Connection::index(3, 1, 0, 2)], 1.0);
}
