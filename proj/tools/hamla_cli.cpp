#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hamla/scenario.hpp"

namespace {

struct RunOptions {
  std::string format = "text";
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> jet_order;
  std::optional<double> tol;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("-o,--output", o.output, "write the report to a file instead of stdout");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("--jet-order", o.jet_order, "jet order (1..4)");
  cmd->add_option("--tol", o.tol, "tolerance for every check");
}

int run_scenario(const std::string& text, const std::string& source, const RunOptions& o) {
  hamla::ScenarioOverrides ov{o.seed, o.jet_order, o.tol};
  hamla::Scenario s;
  try {
    s = hamla::parse_scenario(text, source, ov);
  } catch (const hamla::Error& e) {
    std::cerr << source << ": " << e.what() << "\n";
    return 2;
  }
  hamla::Report r = hamla::run_checks(s);
  std::string out = hamla::emit_report(r, o.format == "json" ? hamla::ReportFormat::Json : hamla::ReportFormat::Text);
  if (o.output.empty()) {
    std::cout << out;
  } else {
    std::ofstream f(o.output, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << o.output << "\n";
      return 2;
    }
    f << out;
  }
  return hamla::exit_code(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian Lie algebroid checks on Poisson charts"};
  app.set_version_flag("--version", std::string(HAMLA_VERSION));
  app.require_subcommand(1);

  RunOptions check_opts;
  std::string path;
  auto* check = app.add_subcommand("check", "run the checks of a scenario file");
  check->add_option("scenario", path, "scenario TOML file")->required();
  add_run_options(check, check_opts);

  auto* gal = app.add_subcommand("gallery", "built-in scenarios");
  gal->require_subcommand(1);
  gal->add_subcommand("list", "list gallery scenarios");
  RunOptions gal_opts;
  std::string name;
  auto* run = gal->add_subcommand("run", "run a gallery scenario");
  run->add_option("name", name, "scenario name")->required();
  add_run_options(run, gal_opts);
  std::string export_name;
  std::string export_path;
  auto* exp = gal->add_subcommand("export", "write a gallery scenario as TOML");
  exp->add_option("name", export_name, "scenario name")->required();
  exp->add_option("path", export_path, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (check->parsed()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "cannot read " << path << "\n";
      return 2;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_scenario(text, path, check_opts);
  }
  if (gal->got_subcommand("list")) {
    for (const auto& e : hamla::gallery()) std::cout << e.name << "  " << e.summary << "\n";
    return 0;
  }
  const std::string& wanted = run->parsed() ? name : export_name;
  const hamla::GalleryEntry* e = hamla::find_gallery(wanted);
  if (!e) {
    std::cerr << "no gallery scenario named '" << wanted << "'\n";
    return 2;
  }
  if (exp->parsed()) {
    if (export_path.empty()) {
      std::cout << e->toml;
      return 0;
    }
    std::ofstream f(export_path, std::ios::binary);
    if (!(f << e->toml)) {
      std::cerr << "cannot write " << export_path << "\n";
      return 2;
    }
    return 0;
  }
  return run_scenario(e->toml, e->name, gal_opts);
}
