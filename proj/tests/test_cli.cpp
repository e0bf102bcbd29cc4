#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hodge/app.hpp"

using namespace hodge::app;
namespace fs = std::filesystem;

namespace {

json cfg(const std::string& text) { return json::parse(text); }

const ordered_json* find_check(const ordered_json& report, const std::string& name) {
  for (const auto& c : report["checks"]) {
    if (c["name"] == name) return &c;
  }
  return nullptr;
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

const CsvFile* find_csv(const RunOutcome& r, const std::string& name) {
  for (const auto& f : r.csv) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("extend with phi = 0 passes in one iteration") {
  const auto r = run(cfg(R"({"command": "extend"})"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["status"] == "pass");
  CHECK(r.report["results"]["solve"]["iterations"] == 1);
  const auto* hist = find_csv(r, "residual_history.csv");
  REQUIRE(hist);
  CHECK(hist->content.rfind("iteration,change\n", 0) == 0);
  CHECK(count_lines(hist->content) == 2);
}

TEST_CASE("verify-ops on the default grid passes") {
  const auto r = run(cfg(R"({"command": "verify-ops"})"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["config"]["grid"]["N"] == 16);
  // nine Hodge relations, two quasi-isometry checks, four Cartan checks
  CHECK(r.report["checks"].size() == 15);
  for (const auto& c : r.report["checks"]) CHECK_MESSAGE(c["pass"].get<bool>(), c.dump());
}

TEST_CASE("beltrami with constant mu = 0.5") {
  const auto r = run(cfg(R"({"command": "beltrami", "phi": {"kind": "constant", "values": [0.5]}})"));
  CHECK(r.exit_code == 0);
  const auto& res = r.report["results"];
  CHECK(res["A"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(res["A"][1].get<double>()) <= 1e-14);
  CHECK(res["B"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(res["B"][1].get<double>()) <= 1e-14);
  const auto* map = find_csv(r, "map.csv");
  REQUIRE(map);
  CHECK(count_lines(map->content) == 1 + 64 * 64);
}

TEST_CASE("beltrami from a manufactured map") {
  const auto r = run(cfg(R"({"command": "beltrami", "seed": 5,
    "phi": {"kind": "from-map", "map": {"random": {"type": "separable", "band": 2, "amplitude": 0.1}}}})"));
  CHECK(r.exit_code == 0);
  const auto* c = find_check(r.report, "beltrami.manufactured_error");
  REQUIRE(c);
  CHECK((*c)["value"].get<double>() <= 1e-7);
}

TEST_CASE("pq-extend records d' sigma without a threshold") {
  const auto r = run(cfg(R"({"command": "pq-extend", "seed": 2,
    "phi": {"kind": "from-map", "map": {"random": {"type": "separable", "band": 2, "amplitude": 1.0}}, "sup_norm": 0.3}})"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["results"].contains("del_norm_relative"));
  CHECK(find_check(r.report, "solve.extension_residual"));
  for (const auto& c : r.report["checks"]) CHECK(c["name"] != "solve.del_residual");
}

TEST_CASE("pluri-check with a manufactured pluricanonical form") {
  const auto r = run(cfg(R"({"command": "pluri-check", "m": 2, "seed": 4, "sigma": {"kind": "manufactured"},
    "phi": {"kind": "from-map", "map": {"random": {"type": "separable", "band": 1, "amplitude": 0.05}}}})"));
  CHECK(r.exit_code == 0);
  CHECK(find_check(r.report, "coupling.solution_vanishes"));
  CHECK(find_check(r.report, "defect_propagation"));
}

TEST_CASE("configuration errors exit with 2") {
  const char* bad[] = {
      R"({"command": "extend", "bogus": 1})",
      R"({"command": "frobnicate"})",
      R"({"grid": {"n": 2}})",
      R"({"command": "extend", "grid": {"n": 2, "N": 12}})",
      R"({"command": "extend", "grid": {"n": 3, "N": 16}})",
      R"({"command": "extend", "tol": "small"})",
      R"({"command": "extend", "phi": {"kind": "constant"}})",
      R"({"command": "extend", "phi": {"kind": "constant", "values": [0.5]}})",
      R"({"command": "extend", "phi": {"kind": "constant", "values": [1.5, 0, 0, 0]}})",
      R"({"command": "extend", "phi": {"kind": "random-band-limited", "sup_norm": 1.2}})",
      R"({"command": "extend", "patch": {}})",
      R"({"command": "pq-extend", "form": {"bidegree": [0, 1]}})",
      R"({"command": "pq-extend", "form": {"coefficients": [1, 2]}})",
      R"({"command": "beltrami", "grid": {"n": 2, "N": 16}})",
      R"({"command": "pluri-check", "sigma": {"kind": "manufactured"}})",
      R"({"command": "pluri-check", "patch": {"random": {"band": 1, "amplitude": 5.0}}})",
      R"({"command": "verify-ops", "seed": -3})",
      R"([1, 2, 3])",
  };
  for (const char* text : bad) {
    const auto r = run(cfg(text));
    CHECK_MESSAGE(r.exit_code == 2, text);
    CHECK(r.report["status"] == "config-error");
    CHECK(r.report.contains("error"));
  }
}

TEST_CASE("non-convergence exits with 3 and keeps the trace") {
  const auto r = run(cfg(R"({"command": "extend", "max_iter": 2, "seed": 1,
    "phi": {"kind": "random-band-limited", "sup_norm": 0.6}})"));
  CHECK(r.exit_code == 3);
  CHECK(r.report["status"] == "non-convergence");
  CHECK(r.report["results"]["solve"]["residual_history"].size() == 2);
}

TEST_CASE("failed certificates exit with 1") {
  const auto r = run(cfg(R"({"command": "extend", "certificate_tol": 1e-30, "seed": 1,
    "phi": {"kind": "random-band-limited", "sup_norm": 0.5}})"));
  CHECK(r.exit_code == 1);
  CHECK(r.report["status"] == "certificate-failure");
}

TEST_CASE("overrides take precedence over the file") {
  Overrides ov;
  ov.seed = 9;
  ov.tol = 1e-8;
  const auto c = parse_config(cfg(R"({"command": "extend", "seed": 1, "tol": 1e-12})"), ov);
  CHECK(c.seed == 9);
  CHECK(c.tol == 1e-8);
}

TEST_CASE("identical config and seed give identical reports") {
  const auto raw = cfg(R"({"command": "extend", "seed": 17,
    "phi": {"kind": "random-band-limited", "sup_norm": 0.5}})");
  const auto a = run(raw);
  const auto b = run(raw);
  CHECK(a.exit_code == 0);
  CHECK(report_without_timings(a.report) == report_without_timings(b.report));
  const auto c = run(raw, Overrides{18, std::nullopt, std::nullopt, std::nullopt});
  CHECK(report_without_timings(a.report) != report_without_timings(c.report));
}

TEST_CASE("the echoed config reproduces the run") {
  const char* configs[] = {
      R"({"command": "extend", "seed": 3, "phi": {"kind": "random-band-limited", "sup_norm": 0.4}})",
      R"({"command": "beltrami", "phi": {"kind": "from-map", "map": {"random": {"type": "separable"}}}})",
      R"({"command": "pq-extend", "phi": {"kind": "constant", "values": [0.1, 0, [0, 0.2], 0]}})",
      R"({"command": "pluri-check", "m": 3, "grid": {"n": 1, "N": 32}})",
      R"({"command": "bench", "bench": {"sizes": [8, 16, 32], "repeats": 1}})",
  };
  for (const char* text : configs) {
    const auto first = run(cfg(text));
    const auto echoed = json::parse(first.report["config"].dump());
    CHECK(echo_config(parse_config(echoed)) == first.report["config"]);
    const auto second = run(echoed);
    CHECK_MESSAGE(report_without_timings(first.report) == report_without_timings(second.report), text);
  }
}

TEST_CASE("echo spells out defaults") {
  const auto e = echo_config(parse_config(cfg(R"({"command": "extend"})")));
  CHECK(e["grid"]["n"] == 2);
  CHECK(e["grid"]["N"] == 16);
  CHECK(e["tol"] == 1e-10);
  CHECK(e["max_iter"] == 400);
  CHECK(e["phi"]["kind"] == "zero");
  CHECK(e["form"]["coefficients"].size() == 1);
  const auto b = echo_config(parse_config(cfg(R"({"command": "bench"})")));
  CHECK(b["bench"]["sizes"] == ordered_json::array({32, 64, 128}));
  CHECK(b["phi"]["band"] == "N/4");
}

TEST_CASE("bench emits a timing table") {
  const auto r = run(cfg(R"({"command": "bench", "bench": {"repeats": 3}})"));
  CHECK(r.exit_code == 0);
  const auto& rows = r.report["timings"]["rows"];
  REQUIRE(rows.size() >= 3);
  const auto* csv = find_csv(r, "bench.csv");
  REQUIRE(csv);
  CHECK(count_lines(csv->content) == 1 + static_cast<int>(rows.size()));
  // four times the points per step; transform and T cost must grow
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i]["t_apply_seconds"].get<double>() >= rows[i - 1]["t_apply_seconds"].get<double>());
    CHECK(rows[i]["fft_seconds"].get<double>() >= rows[i - 1]["fft_seconds"].get<double>());
  }
  for (const auto& row : rows) {
    const double ratio = row["solve_phi0_seconds"].get<double>() / row["t_apply_seconds"].get<double>();
    MESSAGE("N = " << row["N"] << ": phi = 0 solve / T application = " << ratio);
  }
}

TEST_CASE("command-line tool writes the report and CSV files") {
  const fs::path dir = fs::temp_directory_path() / "hodge_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "c.json") << R"({"command": "beltrami", "phi": {"kind": "constant", "values": [0.25]}})";
  }
  const std::string cmd = std::string(HODGE_CLI_PATH) + " --config " + (dir / "c.json").string() + " --out " +
                          (dir / "r.json").string() + " --csv " + (dir / "csv").string();
  CHECK(std::system(cmd.c_str()) == 0);
  std::ifstream in(dir / "r.json");
  const auto report = json::parse(in);
  CHECK(report["status"] == "pass");
  CHECK(report["config"]["output"]["report"] == (dir / "r.json").string());
  CHECK(fs::exists(dir / "csv" / "map.csv"));
  CHECK(fs::exists(dir / "csv" / "residual_history.csv"));

  { std::ofstream(dir / "bad.json") << "{ not json"; }
  const std::string bad = std::string(HODGE_CLI_PATH) + " --config " + (dir / "bad.json").string() +
                          " > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  fs::remove_all(dir);
}
