#include "hodge/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "hodge/beltrami_map.hpp"
#include "hodge/error.hpp"
#include "hodge/extension.hpp"
#include "hodge/hodge_ops.hpp"

namespace hodge::app {

namespace {

const std::vector<std::string> kCommands{"verify-ops", "extend", "pq-extend",
                                         "beltrami",   "pluri-check", "bench"};

// --- reading -----------------------------------------------------------------

class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) {
    touched_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    touched_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return v.get<int>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  /// Reject keys that were never looked at.
  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!touched_.count(k)) throw ConfigError("unknown or unused key " + where(k));
    }
  }

  /// Reject keys outside `allowed` before reading (for command-specific sections).
  void allow_only(const std::vector<std::string>& allowed, const std::string& context) const {
    for (const auto& [k, _] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        throw ConfigError("key " + where(k) + " is not used by " + context);
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> touched_;
};

cplx to_cplx(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + " must be a number or a [re, im] pair");
}

std::vector<cplx> cplx_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_cplx(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::array<int, 4> frequency(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty() || v.size() > 4) throw ConfigError(where + " must be an array of 1 to 4 integers");
  std::array<int, 4> k{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw ConfigError(where + " must contain integers");
    k[i] = v[i].get<int>();
  }
  return k;
}

MapSpec parse_map(Obj& o, std::optional<RandomMapSpec>& random) {
  MapSpec spec;
  if (o.has("linear")) spec.linear = cplx_list(o.at("linear"), o.where("linear"));
  if (o.has("antilinear")) spec.antilinear = cplx_list(o.at("antilinear"), o.where("antilinear"));
  if (o.has("shift")) spec.shift = cplx_list(o.at("shift"), o.where("shift"));
  if (o.has("terms")) {
    const auto& terms = o.at("terms");
    if (!terms.is_array()) throw ConfigError(o.where("terms") + " must be an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Obj t(terms[i], o.where("terms") + "[" + std::to_string(i) + "]");
      TrigTerm term;
      term.component = t.integer("component", 0);
      if (!t.has("frequency")) throw ConfigError(t.where("frequency") + " is required");
      term.frequency = frequency(t.at("frequency"), t.where("frequency"));
      if (!t.has("coefficient")) throw ConfigError(t.where("coefficient") + " is required");
      term.coefficient = to_cplx(t.at("coefficient"), t.where("coefficient"));
      t.finish();
      spec.terms.push_back(term);
    }
  }
  if (o.has("random")) {
    Obj r(o.at("random"), o.where("random"));
    RandomMapSpec rs;
    rs.type = r.string("type", rs.type);
    if (rs.type != "separable" && rs.type != "coupled") {
      throw ConfigError(r.where("type") + " must be \"separable\" or \"coupled\"");
    }
    rs.band = r.integer("band", rs.band);
    rs.amplitude = r.number("amplitude", rs.amplitude);
    r.finish();
    random = rs;
  }
  o.finish();
  return spec;
}

PhiSpec parse_phi(const json& raw, const std::string& path, int n, PhiSpec def) {
  if (raw.is_null()) return def;
  Obj o(raw, path);
  PhiSpec phi;
  phi.kind = o.string("kind", def.kind);
  if (phi.kind == "zero") {
  } else if (phi.kind == "constant") {
    if (!o.has("values")) throw ConfigError(o.where("values") + " is required for constant phi");
    phi.values = cplx_list(o.at("values"), o.where("values"));
    if (static_cast<int>(phi.values.size()) != n * n) {
      throw ConfigError(o.where("values") + " needs n*n = " + std::to_string(n * n) + " entries");
    }
  } else if (phi.kind == "from-map") {
    if (!o.has("map")) throw ConfigError(o.where("map") + " is required for from-map phi");
    Obj m(o.at("map"), o.where("map"));
    phi.map = parse_map(m, phi.random_map);
    if (o.has("sup_norm")) phi.sup_norm = o.number("sup_norm", 0.0);
  } else if (phi.kind == "random-band-limited") {
    if (o.has("band")) {
      const auto& b = o.at("band");
      if (b.is_string() && b.get<std::string>() == "N/4") {
      } else if (b.is_number_integer() && b.get<int>() >= 0) {
        phi.band = b.get<int>();
      } else {
        throw ConfigError(o.where("band") + " must be a non-negative integer or \"N/4\"");
      }
    }
    phi.amplitude = o.number("amplitude", def.amplitude);
    if (o.has("sup_norm")) phi.sup_norm = o.number("sup_norm", 0.0);
    else phi.sup_norm = def.sup_norm;
  } else {
    throw ConfigError(o.where("kind") + " must be zero | constant | from-map | random-band-limited");
  }
  if (phi.sup_norm && !(*phi.sup_norm > 0.0 && *phi.sup_norm < 1.0)) {
    throw ConfigError(o.where("sup_norm") + " must lie in (0, 1)");
  }
  o.finish();
  return phi;
}

std::vector<std::string> command_keys(const std::string& cmd) {
  std::vector<std::string> keys{"command", "grid", "seed", "output"};
  auto add = [&](std::initializer_list<const char*> more) {
    for (const char* k : more) keys.emplace_back(k);
  };
  if (cmd == "verify-ops") add({"trials"});
  if (cmd == "extend" || cmd == "pq-extend") add({"phi", "form", "tol", "max_iter", "certificate_tol"});
  if (cmd == "beltrami") add({"phi", "tol", "max_iter", "certificate_tol"});
  if (cmd == "pluri-check") add({"phi", "patch", "sigma", "m"});
  if (cmd == "bench") add({"phi", "tol", "max_iter", "bench"});
  return keys;
}

// --- echo ------------------------------------------------------------------------

ordered_json cplx_json(cplx c) { return ordered_json::array({c.real(), c.imag()}); }

ordered_json cplx_list_json(const std::vector<cplx>& v) {
  auto a = ordered_json::array();
  for (auto c : v) a.push_back(cplx_json(c));
  return a;
}

ordered_json phi_json(const PhiSpec& p) {
  ordered_json j;
  j["kind"] = p.kind;
  if (p.kind == "constant") j["values"] = cplx_list_json(p.values);
  if (p.kind == "from-map") {
    ordered_json m;
    m["linear"] = cplx_list_json(p.map.linear);
    m["antilinear"] = cplx_list_json(p.map.antilinear);
    m["shift"] = cplx_list_json(p.map.shift);
    auto terms = ordered_json::array();
    for (const auto& t : p.map.terms) {
      ordered_json tj;
      tj["component"] = t.component;
      tj["frequency"] = t.frequency;
      tj["coefficient"] = cplx_json(t.coefficient);
      terms.push_back(tj);
    }
    m["terms"] = terms;
    if (p.random_map) {
      ordered_json r;
      r["type"] = p.random_map->type;
      r["band"] = p.random_map->band;
      r["amplitude"] = p.random_map->amplitude;
      m["random"] = r;
    } else {
      m["random"] = nullptr;
    }
    j["map"] = m;
  }
  if (p.kind == "random-band-limited") {
    if (p.band) j["band"] = *p.band;
    else j["band"] = "N/4";
    j["amplitude"] = p.amplitude;
  }
  if (p.kind == "from-map" || p.kind == "random-band-limited") {
    if (p.sup_norm) j["sup_norm"] = *p.sup_norm;
    else j["sup_norm"] = nullptr;
  }
  return j;
}

// --- building inputs ----------------------------------------------------------

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(s);
}

enum StreamTag : std::uint32_t { phi_stream = 1, patch_stream = 2, sigma_stream = 3, data_stream = 4 };

struct BuiltPhi {
  BeltramiField phi;
  std::optional<TorusMap> map;
};

BuiltPhi build_phi(const TorusGrid& grid, const PhiSpec& spec, std::uint64_t seed) {
  const int n = grid.dim();
  auto rng = stream(seed, phi_stream);
  if (spec.kind == "zero") return {BeltramiField(grid), std::nullopt};
  if (spec.kind == "constant") return {constant_beltrami(grid, spec.values), std::nullopt};
  if (spec.kind == "from-map") {
    MapSpec ms = spec.map;
    if (spec.random_map) {
      const auto& r = *spec.random_map;
      const auto gen = r.type == "separable" ? random_separable_map(grid, rng, r.band, r.amplitude)
                                             : random_coupled_map(grid, rng, r.band, r.amplitude);
      ms.terms.insert(ms.terms.end(), gen.terms.begin(), gen.terms.end());
    }
    if (spec.sup_norm) ms = scale_to_sup_norm(grid, ms, *spec.sup_norm);
    TorusMap map(grid, ms);
    auto phi = beltrami_from_map(map);
    return {std::move(phi), std::move(map)};
  }
  const int band = spec.band ? *spec.band : grid.samples_per_axis() / 4;
  BeltramiField phi(grid);
  if (n == 1) {
    phi.coefficient(0, 0) = to_physical(random_band_limited(grid, rng, band, spec.amplitude));
  } else {
    phi = separable_beltrami(grid, rng, band, spec.amplitude);
  }
  if (spec.sup_norm) {
    const double s = phi.sup_norm();
    if (s > 0.0) phi *= *spec.sup_norm / s;
  }
  return {std::move(phi), std::nullopt};
}

// --- reporting ------------------------------------------------------------------

ordered_json check_json(const Check& c) {
  ordered_json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["relation"] = c.relation;
  j["threshold"] = c.threshold;
  j["pass"] = c.pass;
  return j;
}

ordered_json solve_json(const SolveReport& r) {
  ordered_json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["sup_norm"] = r.sup_norm;
  j["contraction_ratio"] = r.contraction_ratio;
  j["extension_residual"] = r.extension_residual;
  j["dclosed_residual"] = r.dclosed_residual;
  j["fixed_point_residual"] = r.fixed_point_residual;
  j["harmonic_defect"] = r.harmonic_defect;
  j["del_residual"] = r.del_residual;
  j["residual_history"] = r.residual_history;
  return j;
}

std::string history_csv(const SolveReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,change\n";
  for (std::size_t i = 0; i < r.residual_history.size(); ++i) os << i + 1 << ',' << r.residual_history[i] << '\n';
  return os.str();
}

std::string checks_csv(const std::vector<Check>& checks) {
  std::ostringstream os;
  os.precision(17);
  os << "name,value,relation,threshold,pass\n";
  for (const auto& c : checks) {
    os << c.name << ',' << c.value << ',' << c.relation << ',' << c.threshold << ',' << (c.pass ? 1 : 0) << '\n';
  }
  return os.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Context {
  const ExperimentConfig& cfg;
  std::vector<Check> checks;
  ordered_json results = ordered_json::object();
  ordered_json timings = ordered_json::object();
  std::vector<CsvFile> csv;
};

int iteration_bound(double sup, double tol) {
  if (sup <= 0.0) return 1;
  return static_cast<int>(std::ceil(std::log(tol) / std::log(sup))) + 5;
}

// --- commands ---------------------------------------------------------------------

void run_verify(Context& ctx) {
  const auto& c = ctx.cfg;
  const TorusGrid grid(c.n, c.N);
  const int band = c.N / 4;
  auto t0 = Clock::now();
  auto add = [&](std::vector<Check> v) { ctx.checks.insert(ctx.checks.end(), v.begin(), v.end()); };
  add(verify_hodge_axioms(grid, c.seed, c.trials, band));
  ctx.timings["hodge_seconds"] = seconds_since(t0);
  t0 = Clock::now();
  add(verify_quasi_isometry(grid, c.seed + 1, c.trials, band));
  ctx.timings["quasi_isometry_seconds"] = seconds_since(t0);
  t0 = Clock::now();
  add(verify_cartan(grid, c.seed + 2, c.trials));
  ctx.timings["cartan_seconds"] = seconds_since(t0);
  ctx.results["band"] = band;
  ctx.results["cartan"] = c.n == 2 ? "run" : "skipped (n = 1)";
  ctx.csv.push_back({"checks.csv", checks_csv(ctx.checks)});
}

void run_extend(Context& ctx, bool pq) {
  const auto& c = ctx.cfg;
  const TorusGrid grid(c.n, c.N);
  const auto built = build_phi(grid, c.phi, c.seed);
  const auto sigma0 = constant_form(grid, c.form.bidegree, c.form.coefficients);
  const SolveOptions opt{c.tol, c.max_iter, 1e-8};
  ctx.checks.push_back(make_check("phi.integrability", integrability_residual(built.phi), 1e-8));

  const auto t0 = Clock::now();
  SolveReport rep;
  ordered_json pushed = ordered_json::object();
  if (pq) {
    rep = solve_pq_extension(sigma0, built.phi, opt).report;
  } else {
    auto r = extend(sigma0, built.phi, opt);
    rep = r.report;
    for (const auto& [deg, part] : r.pushed.parts()) {
      pushed["(" + std::to_string(deg.p) + "," + std::to_string(deg.q) + ")"] = l2_norm(part);
    }
  }
  ctx.timings["solve_seconds"] = seconds_since(t0);

  const double tol = c.certificate_tol;
  ctx.checks.push_back(make_check("solve.extension_residual", rep.extension_residual, tol));
  if (!pq) ctx.checks.push_back(make_check("solve.dclosed_residual", rep.dclosed_residual, tol));
  ctx.checks.push_back(make_check("solve.harmonic_defect", rep.harmonic_defect, tol));
  ctx.checks.push_back(make_check("solve.iterations", rep.iterations, iteration_bound(rep.sup_norm, c.tol)));
  ctx.results["solve"] = solve_json(rep);
  if (pq) ctx.results["del_norm_relative"] = rep.del_residual;
  else ctx.results["pushed_norms"] = pushed;
  ctx.csv.push_back({"residual_history.csv", history_csv(rep)});
}

void run_beltrami(Context& ctx) {
  const auto& c = ctx.cfg;
  const TorusGrid grid(c.n, c.N);
  const auto built = build_phi(grid, c.phi, c.seed);
  const SolveOptions opt{c.tol, c.max_iter, 1e-8};
  const auto t0 = Clock::now();
  const auto r = solve_beltrami_map(built.phi, opt);
  ctx.timings["solve_seconds"] = seconds_since(t0);
  const auto& rep = r.report;
  ctx.checks.push_back(make_check("beltrami.pointwise_residual", rep.pointwise_residual, 10.0 * c.tol));
  ctx.checks.push_back(make_check("beltrami.split_holomorphic", rep.split_holomorphic, c.certificate_tol));
  ctx.checks.push_back(make_check("beltrami.split_antiholomorphic", rep.split_antiholomorphic, c.certificate_tol));
  ctx.checks.push_back(make_check("beltrami.reconstruction_error", rep.reconstruction_error, 1e-10));
  ctx.checks.push_back(make_check("beltrami.orientation_margin", rep.orientation_margin, ">", 0.0));
  if (built.map) {
    // the map's own normalization: subtract F(0), divide by its z-coefficient
    const auto& spec = built.map->spec();
    const cplx L = spec.linear.empty() ? cplx(1.0) : spec.linear[0];
    auto expected = built.map->values(0);
    expected -= ScalarField::constant(grid, expected[0]);
    expected *= 1.0 / L;
    ctx.checks.push_back(make_check("beltrami.manufactured_error", sup_abs(r.map.values() - expected), 1e-7));
  }
  ctx.results["A"] = cplx_json(r.map.A);
  ctx.results["B"] = cplx_json(r.map.B);
  ctx.results["raw_A"] = cplx_json(rep.raw_A);
  ctx.results["raw_B"] = cplx_json(rep.raw_B);
  ctx.results["mu_sup_norm"] = built.phi.sup_norm();
  ctx.results["solve"] = solve_json(rep.solve);
  std::ostringstream os;
  write_map_csv(os, r.map, built.phi);
  ctx.csv.push_back({"map.csv", os.str()});
  ctx.csv.push_back({"residual_history.csv", history_csv(rep.solve)});
}

void run_pluri(Context& ctx) {
  const auto& c = ctx.cfg;
  const TorusGrid grid(c.n, c.N);
  const auto built = build_phi(grid, c.phi, c.seed);
  auto terms = c.patch.terms;
  if (c.patch.random) {
    auto rng = stream(c.seed, patch_stream);
    const auto more = random_potential(grid, rng, c.patch.band, c.patch.amplitude);
    terms.insert(terms.end(), more.begin(), more.end());
  }
  const KahlerPatch patch(grid, terms, c.patch.min_margin);

  ScalarField f(grid);
  if (c.sigma.kind == "manufactured") {
    if (!built.map) throw ConfigError("sigma.kind = manufactured needs phi.kind = from-map");
    const auto& F = *built.map;
    for (std::size_t x = 0; x < grid.size(); ++x) {
      const cplx det = c.n == 1 ? F.a(0, 0)[x] : F.a(0, 0)[x] * F.a(1, 1)[x] - F.a(0, 1)[x] * F.a(1, 0)[x];
      f[x] = std::pow(det, c.m);
    }
  } else {
    auto rng = stream(c.seed, sigma_stream);
    f = to_physical(random_band_limited(grid, rng, c.sigma.band));
  }
  const auto sigma = pluri_form(f, c.m);

  const auto t0 = Clock::now();
  ctx.checks.push_back(make_check("patch.positivity_margin", patch.positivity_margin(), ">", c.patch.min_margin));
  ctx.checks.push_back(make_check("patch.kahler_symmetry", patch.kahler_symmetry_defect(), 1e-10));
  ctx.checks.push_back(make_check("patch.kahler_form_closed", patch.kahler_form_closedness(), 1e-10));
  const double integ = integrability_residual(built.phi);
  ctx.checks.push_back(make_check("phi.integrability", integ, 1e-8));
  if (built.map) {
    const auto claim = claim_identity_residual(*built.map, built.phi);
    ctx.checks.push_back(make_check("phi.claim_identity", *std::max_element(claim.begin(), claim.end()), 1e-8));
  }
  const auto psi = psi_defect(sigma, built.phi, patch, c.m);
  const double scale = l2_norm(sigma);
  ctx.checks.push_back(make_check("psi.global_vs_local",
                                  l2_norm(psi - psi_defect_local(sigma, built.phi, patch, c.m)) / scale, 1e-9));
  const auto coupling = coupling_test(sigma, built.phi, patch, c.m);
  ctx.checks.push_back(make_check("coupling.consistent", coupling.consistent ? 1.0 : 0.0, "==", 1.0));
  if (c.sigma.kind == "manufactured") {
    ctx.checks.push_back(make_check("coupling.solution_vanishes", coupling.both_small ? 1.0 : 0.0, "==", 1.0));
  }
  if (c.n == 2 && integ <= 1e-8) {
    ctx.checks.push_back(
        make_check("defect_propagation", defect_propagation_residual(sigma, built.phi, patch, c.m), 1e-7));
  }
  ctx.timings["checks_seconds"] = seconds_since(t0);
  ctx.results["positivity_margin"] = patch.positivity_margin();
  ctx.results["psi_norm_relative"] = l2_norm(psi) / scale;
  ctx.results["coupling_global"] = coupling.global_residual;
  ctx.results["coupling_local"] = coupling.local_residual;
  ctx.results["defect_propagation"] = c.n == 2 ? "checked" : "vacuous for n = 1";
  ctx.csv.push_back({"checks.csv", checks_csv(ctx.checks)});
}

void run_bench(Context& ctx) {
  const auto& c = ctx.cfg;
  auto rows = ordered_json::array();
  auto time_rows = ordered_json::array();
  std::ostringstream csv;
  csv.precision(9);
  csv << "n,N,points,fft_seconds,t_apply_seconds,solve_seconds,solve_phi0_seconds,iterations\n";
  auto best_of = [&](auto&& fn) {
    double best = 1e300;
    for (int r = 0; r < c.bench_repeats; ++r) {
      const auto t0 = Clock::now();
      fn();
      best = std::min(best, seconds_since(t0));
    }
    return best;
  };
  for (int N : c.bench_sizes) {
    const TorusGrid grid(c.n, N);
    const HodgePackage h(grid);
    auto rng = stream(c.seed, data_stream);
    const auto field = random_band_limited(grid, rng, N / 4);
    const auto form = random_form(grid, {c.n - 1, 1}, rng, N / 4);
    const auto built = build_phi(grid, c.phi, c.seed);
    const SolveOptions opt{c.tol, c.max_iter, 1e-8};
    const auto omega0 = volume_form(grid);

    const double fft = best_of([&] { (void)to_physical(to_spectral(field)); });
    const double tapply = best_of([&] { (void)h.t_operator(form); });
    int iterations = 0;
    const double solve = best_of([&] { iterations = solve_extension(omega0, built.phi, opt).report.iterations; });
    const double solve0 = best_of([&] { (void)solve_extension(omega0, BeltramiField(grid), opt); });

    ordered_json row;
    row["N"] = N;
    row["points"] = grid.size();
    row["iterations"] = iterations;
    rows.push_back(row);
    ordered_json trow;
    trow["N"] = N;
    trow["fft_seconds"] = fft;
    trow["t_apply_seconds"] = tapply;
    trow["solve_seconds"] = solve;
    trow["solve_phi0_seconds"] = solve0;
    time_rows.push_back(trow);
    csv << c.n << ',' << N << ',' << grid.size() << ',' << fft << ',' << tapply << ',' << solve << ','
        << solve0 << ',' << iterations << '\n';
  }
  ctx.checks.push_back(make_check("bench.rows", static_cast<double>(rows.size()), ">=", 3.0));
  ctx.results["rows"] = rows;
  ctx.timings["rows"] = time_rows;
  ctx.csv.push_back({"bench.csv", csv.str()});
}

}  // namespace

// --- public -----------------------------------------------------------------------

ExperimentConfig parse_config(const json& raw, const Overrides& ov) {
  Obj top(raw, "config");
  ExperimentConfig c;
  if (!top.has("command")) throw ConfigError("config.command is required");
  c.command = top.string("command", "");
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    throw ConfigError("config.command must be one of verify-ops | extend | pq-extend | beltrami | "
                      "pluri-check | bench");
  }
  top.allow_only(command_keys(c.command), "command " + c.command);
  const bool bench = c.command == "bench";

  c.n = c.command == "beltrami" || bench ? 1 : 2;
  c.N = c.command == "beltrami" ? 64 : 16;
  if (top.has("grid")) {
    Obj g(top.at("grid"), "config.grid");
    c.n = g.integer("n", c.n);
    if (!bench) c.N = g.integer("N", c.N);
    g.finish();
  }
  if (c.n != 1 && c.n != 2) throw ConfigError("config.grid.n must be 1 or 2");
  if (!bench && (c.N < 8 || (c.N & (c.N - 1)) != 0)) {
    throw ConfigError("config.grid.N must be a power of two >= 8");
  }
  if (c.command == "beltrami" && c.n != 1) throw ConfigError("beltrami works in complex dimension 1");

  if (top.has("seed")) {
    const auto& s = top.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ConfigError("config.seed must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  c.tol = top.number("tol", c.tol);
  c.max_iter = top.integer("max_iter", c.max_iter);
  c.certificate_tol = top.number("certificate_tol", c.certificate_tol);
  c.trials = top.integer("trials", c.trials);
  c.m = top.integer("m", c.m);
  if (ov.seed) c.seed = *ov.seed;
  if (ov.tol) c.tol = *ov.tol;
  if (!(c.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (c.max_iter < 1) throw ConfigError("config.max_iter must be >= 1");
  if (c.trials < 1) throw ConfigError("config.trials must be >= 1");
  if (c.m < 1) throw ConfigError("config.m must be >= 1");

  PhiSpec def;
  if (bench) {
    def.kind = "random-band-limited";
    def.sup_norm = 0.3;
  }
  c.phi = def;
  if (top.has("phi")) c.phi = parse_phi(top.at("phi"), "config.phi", c.n, def);
  if (bench && c.phi.kind != "zero" && c.phi.kind != "random-band-limited") {
    throw ConfigError("bench supports phi.kind zero or random-band-limited (it is rebuilt per grid size)");
  }

  if (c.command == "extend" || c.command == "pq-extend") {
    c.form.bidegree = c.command == "extend" ? Bidegree{c.n, 0} : Bidegree{1, 1};
    if (top.has("form")) {
      Obj f(top.at("form"), "config.form");
      if (f.has("bidegree")) {
        if (c.command == "extend") throw ConfigError("extend always uses an (n,0)-form; drop form.bidegree");
        const auto& b = f.at("bidegree");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer()) {
          throw ConfigError("config.form.bidegree must be [p, q]");
        }
        c.form.bidegree = {b[0].get<int>(), b[1].get<int>()};
      }
      if (f.has("coefficients")) c.form.coefficients = cplx_list(f.at("coefficients"), "config.form.coefficients");
      f.finish();
    }
    const auto& masks = basis::masks(c.n, c.form.bidegree);
    if (masks.empty() || c.form.bidegree.p < 1) {
      throw ConfigError("config.form.bidegree must satisfy 1 <= p <= n, 0 <= q <= n");
    }
    if (c.form.coefficients.empty()) c.form.coefficients.assign(masks.size(), cplx(1.0));
    if (c.form.coefficients.size() != masks.size()) {
      throw ConfigError("config.form.coefficients needs " + std::to_string(masks.size()) + " entries");
    }
  }

  if (c.command == "pluri-check") {
    if (top.has("patch")) {
      Obj p(top.at("patch"), "config.patch");
      if (p.has("terms")) {
        const auto& terms = p.at("terms");
        if (!terms.is_array()) throw ConfigError("config.patch.terms must be an array");
        for (std::size_t i = 0; i < terms.size(); ++i) {
          Obj t(terms[i], "config.patch.terms[" + std::to_string(i) + "]");
          PotentialTerm term;
          if (!t.has("frequency") || !t.has("coefficient")) {
            throw ConfigError(t.where("frequency") + " and coefficient are required");
          }
          term.frequency = frequency(t.at("frequency"), t.where("frequency"));
          term.coefficient = to_cplx(t.at("coefficient"), t.where("coefficient"));
          t.finish();
          c.patch.terms.push_back(term);
        }
        c.patch.random = false;
      }
      if (p.has("random")) {
        const auto& r = p.at("random");
        if (r.is_boolean()) {
          c.patch.random = r.get<bool>();
        } else {
          Obj ro(r, "config.patch.random");
          c.patch.random = true;
          c.patch.band = ro.integer("band", c.patch.band);
          c.patch.amplitude = ro.number("amplitude", c.patch.amplitude);
          ro.finish();
        }
      }
      c.patch.min_margin = p.number("min_margin", c.patch.min_margin);
      p.finish();
    }
    if (top.has("sigma")) {
      Obj s(top.at("sigma"), "config.sigma");
      c.sigma.kind = s.string("kind", c.sigma.kind);
      if (c.sigma.kind != "random" && c.sigma.kind != "manufactured") {
        throw ConfigError("config.sigma.kind must be random | manufactured");
      }
      c.sigma.band = s.integer("band", c.sigma.band);
      s.finish();
    }
    if (c.sigma.kind == "manufactured" && c.phi.kind != "from-map") {
      throw ConfigError("sigma.kind = manufactured needs phi.kind = from-map");
    }
  }

  if (bench) {
    c.bench_sizes = c.n == 1 ? std::vector<int>{32, 64, 128} : std::vector<int>{8, 16, 32};
    if (top.has("bench")) {
      Obj b(top.at("bench"), "config.bench");
      if (b.has("sizes")) {
        const auto& s = b.at("sizes");
        if (!s.is_array()) throw ConfigError("config.bench.sizes must be an array");
        c.bench_sizes.clear();
        for (const auto& v : s) {
          if (!v.is_number_integer()) throw ConfigError("config.bench.sizes must contain integers");
          const int N = v.get<int>();
          if (N < 8 || (N & (N - 1)) != 0) throw ConfigError("config.bench.sizes entries must be powers of two >= 8");
          c.bench_sizes.push_back(N);
        }
      }
      c.bench_repeats = b.integer("repeats", c.bench_repeats);
      b.finish();
    }
    if (c.bench_repeats < 1) throw ConfigError("config.bench.repeats must be >= 1");
  }

  if (top.has("output")) {
    Obj o(top.at("output"), "config.output");
    if (o.has("report")) c.report_path = o.string("report", "");
    if (o.has("csv")) c.csv_dir = o.string("csv", "");
    o.finish();
  }
  if (ov.report_path) c.report_path = ov.report_path;
  if (ov.csv_dir) c.csv_dir = ov.csv_dir;
  top.finish();
  return c;
}

ordered_json echo_config(const ExperimentConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  ordered_json grid;
  grid["n"] = c.n;
  if (c.command != "bench") grid["N"] = c.N;
  j["grid"] = grid;
  j["seed"] = c.seed;
  const auto& cmd = c.command;
  if (cmd == "verify-ops") j["trials"] = c.trials;
  if (cmd != "verify-ops") j["phi"] = phi_json(c.phi);
  if (cmd == "extend" || cmd == "pq-extend") {
    ordered_json f;
    if (cmd == "pq-extend") f["bidegree"] = {c.form.bidegree.p, c.form.bidegree.q};
    f["coefficients"] = cplx_list_json(c.form.coefficients);
    j["form"] = f;
  }
  if (cmd == "pluri-check") {
    ordered_json p;
    auto terms = ordered_json::array();
    for (const auto& t : c.patch.terms) {
      ordered_json tj;
      tj["frequency"] = t.frequency;
      tj["coefficient"] = cplx_json(t.coefficient);
      terms.push_back(tj);
    }
    p["terms"] = terms;
    if (c.patch.random) {
      ordered_json r;
      r["band"] = c.patch.band;
      r["amplitude"] = c.patch.amplitude;
      p["random"] = r;
    } else {
      p["random"] = false;
    }
    p["min_margin"] = c.patch.min_margin;
    j["patch"] = p;
    ordered_json s;
    s["kind"] = c.sigma.kind;
    s["band"] = c.sigma.band;
    j["sigma"] = s;
    j["m"] = c.m;
  }
  if (cmd == "extend" || cmd == "pq-extend" || cmd == "beltrami" || cmd == "bench") {
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
  }
  if (cmd == "extend" || cmd == "pq-extend" || cmd == "beltrami") j["certificate_tol"] = c.certificate_tol;
  if (cmd == "bench") {
    ordered_json b;
    b["sizes"] = c.bench_sizes;
    b["repeats"] = c.bench_repeats;
    j["bench"] = b;
  }
  ordered_json out;
  out["report"] = c.report_path ? ordered_json(*c.report_path) : ordered_json(nullptr);
  out["csv"] = c.csv_dir ? ordered_json(*c.csv_dir) : ordered_json(nullptr);
  j["output"] = out;
  return j;
}

RunOutcome run(const json& raw, const Overrides& overrides) {
  const auto start = Clock::now();
  RunOutcome out;
  auto& report = out.report;

  ExperimentConfig cfg;
  try {
    cfg = parse_config(raw, overrides);
  } catch (const std::exception& e) {
    report["command"] = raw.is_object() && raw.contains("command") ? raw["command"] : json(nullptr);
    report["config"] = raw;
    report["status"] = "config-error";
    report["error"] = e.what();
    report["exit_code"] = static_cast<int>(config_error);
    out.exit_code = config_error;
    return out;
  }

  report["command"] = cfg.command;
  report["config"] = echo_config(cfg);
  Context ctx{cfg, {}, {}, {}, {}};
  std::string status = "pass";
  int code = pass;
  std::optional<SolveReport> failed;
  try {
    if (cfg.command == "verify-ops") run_verify(ctx);
    if (cfg.command == "extend") run_extend(ctx, false);
    if (cfg.command == "pq-extend") run_extend(ctx, true);
    if (cfg.command == "beltrami") run_beltrami(ctx);
    if (cfg.command == "pluri-check") run_pluri(ctx);
    if (cfg.command == "bench") run_bench(ctx);
    const bool all = std::all_of(ctx.checks.begin(), ctx.checks.end(), [](const Check& c) { return c.pass; });
    if (!all) {
      status = "certificate-failure";
      code = certificate_failure;
    }
  } catch (const SolveFailure& e) {
    status = "non-convergence";
    code = non_convergence;
    report["error"] = e.what();
    failed = e.report();
  } catch (const std::invalid_argument& e) {
    // PreconditionError and ShapeError: the input was rejected
    status = "config-error";
    code = config_error;
    report["error"] = e.what();
  } catch (const ConfigError& e) {
    status = "config-error";
    code = config_error;
    report["error"] = e.what();
  }

  auto checks = ordered_json::array();
  for (const auto& c : ctx.checks) checks.push_back(check_json(c));
  report["checks"] = checks;
  if (failed) {
    ctx.results["solve"] = solve_json(*failed);
    ctx.csv.push_back({"residual_history.csv", history_csv(*failed)});
  }
  report["results"] = ctx.results;
  report["status"] = status;
  report["exit_code"] = code;
  ctx.timings["total_seconds"] = seconds_since(start);
  report["timings"] = ctx.timings;
  out.exit_code = code;
  out.csv = std::move(ctx.csv);
  return out;
}

std::string report_without_timings(const ordered_json& report) {
  auto copy = report;
  copy.erase("timings");
  return copy.dump(2);
}

}  // namespace hodge::app
