#include "hodge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hodge/deformation.hpp"
#include "hodge/hodge_ops.hpp"

namespace hodge {

namespace {

double rel(const FormField& a, const FormField& b, double scale) {
  return l2_norm(a - b) / std::max(scale, 1e-300);
}

struct Worst {
  std::vector<std::pair<std::string, double>> entries;
  void update(const std::string& name, double v) {
    for (auto& [n, w] : entries) {
      if (n == name) {
        w = std::max(w, v);
        return;
      }
    }
    entries.emplace_back(name, v);
  }
};

}  // namespace

Check make_check(std::string name, double value, double threshold) {
  return make_check(std::move(name), value, "<=", threshold);
}

Check make_check(std::string name, double value, const std::string& relation, double threshold) {
  bool pass = false;
  if (relation == "<=") {
    pass = value <= threshold;
  } else if (relation == ">=") {
    pass = value >= threshold;
  } else if (relation == ">") {
    pass = value > threshold;
  } else if (relation == "==") {
    pass = value == threshold;
  } else {
    throw std::invalid_argument("unknown relation " + relation);
  }
  return {std::move(name), value, relation, threshold, pass};
}

std::vector<Check> verify_hodge_axioms(const TorusGrid& grid, std::uint64_t seed, int trials,
                                       int band) {
  const HodgePackage h(grid);
  const int n = grid.dim();
  std::mt19937_64 rng(seed);
  Worst worst;
  for (int p = 0; p <= n; ++p) {
    for (int q = 0; q <= n; ++q) {
      for (int t = 0; t < trials; ++t) {
        // the relations are between Fourier multipliers, so stay in coefficient space
        const auto s = random_form(grid, {p, q}, rng, band, 1.0, Representation::spectral);
        const double sc = l2_norm(s);
        const auto Hs = h.harmonic_projection(s);
        const auto Gs = h.green(s);
        const auto lap = h.laplacian_dbar(s);
        const auto db_s = h.dolbeault(s, Dolbeault::dbar);
        const auto dbs_s = h.dolbeault_adjoint(s, Dolbeault::dbar);
        const auto db = [&](const FormField& f) { return h.dolbeault(f, Dolbeault::dbar); };
        const auto dbs = [&](const FormField& f) { return h.dolbeault_adjoint(f, Dolbeault::dbar); };
        const auto s_perp = s - Hs;

        worst.update("laplacian_green",
                     std::max(rel(h.laplacian_dbar(Gs), s_perp, sc), rel(h.green(lap), s_perp, sc)));
        worst.update("dbar_green_commute", rel(db(Gs), h.green(db_s), sc));
        worst.update("dbar_star_green_commute", rel(dbs(Gs), h.green(dbs_s), sc));
        worst.update("harmonic_green_vanish",
                     std::max(l2_norm(h.harmonic_projection(Gs)), l2_norm(h.green(Hs))) / sc);
        worst.update("dbar_harmonic_vanish",
                     std::max(l2_norm(db(Hs)), l2_norm(h.harmonic_projection(db_s))) / sc);
        worst.update("dbar_star_harmonic_vanish",
                     std::max(l2_norm(dbs(Hs)), l2_norm(h.harmonic_projection(dbs_s))) / sc);
        worst.update("kahler_laplacians", rel(h.laplacian_del(s), lap, std::max(l2_norm(lap), sc)));

        // <D s, u> = <s, D* u> with u of the target bidegree
        for (auto which : {Dolbeault::dbar, Dolbeault::del}) {
          const auto ds = which == Dolbeault::dbar ? db_s : h.dolbeault(s, which);
          if (ds.structurally_zero()) continue;
          const auto u = random_form(grid, ds.bidegree(), rng, band, 1.0, Representation::spectral);
          const double scale = l2_norm(ds) * l2_norm(u);
          const double err = std::abs(inner(ds, u) - inner(s, h.dolbeault_adjoint(u, which)));
          worst.update(which == Dolbeault::dbar ? "adjoint_dbar" : "adjoint_del", err / scale);
        }
      }
    }
  }
  std::vector<Check> out;
  for (const auto& [name, v] : worst.entries) out.push_back(make_check("hodge." + name, v, 1e-12));
  return out;
}

std::vector<Check> verify_quasi_isometry(const TorusGrid& grid, std::uint64_t seed, int trials,
                                         int band) {
  const HodgePackage h(grid);
  const int n = grid.dim();
  std::mt19937_64 rng(seed);
  double excess = -1.0;
  double energy = 0.0;
  for (int p = 0; p <= n; ++p) {
    for (int q = 0; q <= n; ++q) {
      for (int t = 0; t < trials; ++t) {
        const auto g = random_form(grid, {p, q}, rng, band, 1.0, Representation::spectral);
        const auto e = h.energy_terms(g);
        excess = std::max(excess, std::sqrt(e.t_norm2 / e.g_norm2) - 1.0);
        energy = std::max(energy, std::abs(e.t_norm2 - e.rhs()) / e.g_norm2);
      }
    }
  }
  return {make_check("quasi_isometry.norm_excess", excess, 1e-12),
          make_check("quasi_isometry.energy_identity", energy, 1e-10)};
}

std::vector<Check> verify_cartan(const TorusGrid& grid, std::uint64_t seed, int trials) {
  if (grid.dim() != 2) return {};
  std::mt19937_64 rng(seed);
  double bracket = 0.0, special = 0.0, conj_general = 0.0, conj_integrable = 0.0;
  for (int t = 0; t < trials; ++t) {
    // band 1 keeps products of up to five fields resolved on N = 16
    const auto phi = random_beltrami(grid, rng, 1, 0.5);
    const auto psi = random_beltrami(grid, rng, 1, 0.5);
    for (Bidegree d : {Bidegree{2, 0}, Bidegree{1, 1}, Bidegree{2, 1}}) {
      const auto s = random_form(grid, d, rng, 1);
      bracket = std::max(bracket, cartan_residual(phi, psi, s));
      special = std::max(special, cartan_special_residual(phi, s));
    }
    const auto s = random_form(grid, {2, 0}, rng, 1);
    conj_general = std::max(conj_general, conjugation_residual(phi, s).general_norm);
    const auto tri = triangular_beltrami(grid, rng, 1, 0.5);
    conj_integrable = std::max(conj_integrable, conjugation_residual(tri, s).integrable_norm);
  }
  return {make_check("cartan.bracket_formula", bracket, 1e-8),
          make_check("cartan.special_formula", special, 1e-8),
          make_check("cartan.conjugation_general", conj_general, 1e-8),
          make_check("cartan.conjugation_integrable", conj_integrable, 1e-8)};
}

}  // namespace hodge
