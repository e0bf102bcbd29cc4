#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hodge/app.hpp"

namespace fs = std::filesystem;
using hodge::app::json;

int main(int argc, char** argv) {
  CLI::App cli{"Spectral deformation experiments on flat complex tori"};
  std::string config_path;
  hodge::app::Overrides ov;
  std::string out_path, csv_dir;
  std::uint64_t seed = 0;
  double tol = 0.0;
  bool echo_only = false;
  cli.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = cli.add_option("--out", out_path, "write the JSON report here instead of stdout");
  auto* csv_opt = cli.add_option("--csv", csv_dir, "directory for CSV output");
  auto* seed_opt = cli.add_option("--seed", seed, "override config seed");
  auto* tol_opt = cli.add_option("--tol", tol, "override config tol");
  cli.add_flag("--echo-config", echo_only, "print the completed config and exit");
  CLI11_PARSE(cli, argc, argv);

  json raw;
  try {
    std::ifstream in(config_path);
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "config is not valid JSON: " << e.what() << '\n';
    return hodge::app::config_error;
  }
  if (*seed_opt) ov.seed = seed;
  if (*tol_opt) ov.tol = tol;
  if (*out_opt) ov.report_path = out_path;
  if (*csv_opt) ov.csv_dir = csv_dir;

  if (echo_only) {
    try {
      std::cout << hodge::app::echo_config(hodge::app::parse_config(raw, ov)).dump(2) << '\n';
      return 0;
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return hodge::app::config_error;
    }
  }

  const auto outcome = hodge::app::run(raw, ov);
  const auto& cfg = outcome.report["config"];
  std::optional<std::string> report_path, dir;
  if (cfg.contains("output")) {
    if (cfg["output"]["report"].is_string()) report_path = cfg["output"]["report"].get<std::string>();
    if (cfg["output"]["csv"].is_string()) dir = cfg["output"]["csv"].get<std::string>();
  } else {
    if (ov.report_path) report_path = ov.report_path;
    if (ov.csv_dir) dir = ov.csv_dir;
  }

  const std::string text = outcome.report.dump(2) + "\n";
  if (report_path) {
    std::ofstream(*report_path) << text;
  } else {
    std::cout << text;
  }
  if (dir && !outcome.csv.empty()) {
    fs::create_directories(*dir);
    for (const auto& f : outcome.csv) std::ofstream(fs::path(*dir) / f.name) << f.content;
  }
  if (outcome.exit_code != 0 && outcome.report.contains("error")) {
    std::cerr << outcome.report["status"].get<std::string>() << ": "
              << outcome.report["error"].get<std::string>() << '\n';
  }
  return outcome.exit_code;
}
