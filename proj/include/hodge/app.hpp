#pragma once
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hodge/deformation.hpp"
#include "hodge/pluri.hpp"
#include "hodge/verify.hpp"

namespace hodge::app {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Malformed or inconsistent experiment configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { pass = 0, certificate_failure = 1, config_error = 2, non_convergence = 3 };

struct RandomMapSpec {
  std::string type = "separable";  ///< separable | coupled
  int band = 1;
  double amplitude = 0.05;
};

struct PhiSpec {
  std::string kind = "zero";  ///< zero | constant | from-map | random-band-limited
  std::vector<cplx> values;   ///< constant: n x n row-major
  MapSpec map;                ///< from-map: explicit part
  std::optional<RandomMapSpec> random_map;
  std::optional<int> band;    ///< random-band-limited: empty means N/4
  double amplitude = 0.1;
  std::optional<double> sup_norm;
};

struct FormSpec {
  Bidegree bidegree;
  std::vector<cplx> coefficients;
};

struct PatchSpec {
  std::vector<PotentialTerm> terms;
  bool random = true;
  int band = 1;
  double amplitude = 0.05;
  double min_margin = 0.1;
};

struct SigmaSpec {
  std::string kind = "random";  ///< random | manufactured
  int band = 1;
};

struct ExperimentConfig {
  std::string command;
  int n = 2;
  int N = 16;
  PhiSpec phi;
  FormSpec form;
  PatchSpec patch;
  SigmaSpec sigma;
  int m = 2;
  double tol = 1e-10;
  int max_iter = 400;
  std::uint64_t seed = 0;
  double certificate_tol = 1e-9;
  int trials = 5;
  std::vector<int> bench_sizes;
  int bench_repeats = 3;
  std::optional<std::string> report_path;
  std::optional<std::string> csv_dir;
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> report_path;
  std::optional<std::string> csv_dir;
};

/// Validate and complete a raw config; unknown keys and wrong types are errors.
ExperimentConfig parse_config(const json& raw, const Overrides& overrides = {});

/// The completed config with every default spelled out, in a stable order.
ordered_json echo_config(const ExperimentConfig& config);

struct CsvFile {
  std::string name;
  std::string content;
};

struct RunOutcome {
  ordered_json report;
  int exit_code = 0;
  std::vector<CsvFile> csv;
};

/// Run one experiment. Never throws for bad input: configuration problems
/// become exit code 2 with the message in the report.
RunOutcome run(const json& raw, const Overrides& overrides = {});

/// The report without its "timings" member, serialized; used for determinism checks.
std::string report_without_timings(const ordered_json& report);

}  // namespace hodge::app
