#pragma once

#include "hodge/forms.hpp"

namespace hodge {

enum class Dolbeault { del, dbar };

struct FormNorms {
  double l2 = 0.0;
  double sup = 0.0;
};

/// The terms of ||T g||^2 = ||g||^2 - ||Hg||^2 - <d'* g, G d'* g> - ||dbar G d' g||^2.
struct EnergyTerms {
  double t_norm2 = 0.0;
  double g_norm2 = 0.0;
  double harmonic_norm2 = 0.0;
  double del_star_green = 0.0;
  double dbar_green_del_norm2 = 0.0;

  double rhs() const {
    return g_norm2 - harmonic_norm2 - del_star_green - dbar_green_del_norm2;
  }
};

/// Hodge theory of the flat torus. With <dz^a, dz^b> = 2 delta_ab the
/// formal adjoints are
///   dbar* = -2 sum_b i_{d/dzbar^b} d/dz_b,   d'* = -2 sum_a i_{d/dz^a} d/dzbar_a,
/// and both Laplacians act componentwise as the multiplier |k|^2 / 2.
/// Every operator keeps the representation of its input.
class HodgePackage {
 public:
  explicit HodgePackage(TorusGrid grid);

  const TorusGrid& grid() const noexcept { return grid_; }

  FormField dolbeault(const FormField& f, Dolbeault which) const;
  FormField dolbeault_adjoint(const FormField& f, Dolbeault which) const;
  /// dbar dbar* + dbar* dbar, by composition.
  FormField laplacian_dbar(const FormField& f) const;
  /// d' d'* + d'* d', by composition.
  FormField laplacian_del(const FormField& f) const;
  FormField green(const FormField& f) const;
  FormField harmonic_projection(const FormField& f) const;
  /// dbar* G d': bidegree (p,q) -> (p+1, q-1).
  FormField t_operator(const FormField& f) const;

  FormNorms norms(const FormField& f) const;
  EnergyTerms energy_terms(const FormField& g) const;

 private:
  FormField apply_multiplier(const FormField& f, std::span<const double> symbol) const;

  TorusGrid grid_;
};

}  // namespace hodge
