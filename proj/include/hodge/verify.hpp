#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "hodge/grid.hpp"

namespace hodge {

struct Check {
  std::string name;
  double value = 0.0;
  /// one of "<=", ">=", ">", "=="
  std::string relation = "<=";
  double threshold = 0.0;
  bool pass = false;
};

/// value <= threshold
Check make_check(std::string name, double value, double threshold);
/// value `relation` threshold; NaN never passes
Check make_check(std::string name, double value, const std::string& relation, double threshold);

/// Green-operator relations, Kahler identity and adjointness of dbar and d',
/// each as the worst relative error over `trials` random forms per bidegree.
std::vector<Check> verify_hodge_axioms(const TorusGrid& grid, std::uint64_t seed, int trials,
                                       int band);

/// max ||T g|| / ||g|| - 1 and the relative error of the energy identity.
std::vector<Check> verify_quasi_isometry(const TorusGrid& grid, std::uint64_t seed, int trials,
                                         int band);

/// Generalized Cartan formulas and the conjugation formula on random
/// band-limited data (n = 2; returns nothing for n = 1).
std::vector<Check> verify_cartan(const TorusGrid& grid, std::uint64_t seed, int trials);

}  // namespace hodge
