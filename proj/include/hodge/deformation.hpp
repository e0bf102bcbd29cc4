#pragma once

#include <array>
#include <random>
#include <vector>

#include "hodge/forms.hpp"

namespace hodge {

/// One periodic term  coefficient * e^{i k.x}  added to component F^i.
struct TrigTerm {
  int component = 0;
  std::array<int, 4> frequency{};
  cplx coefficient = 0.0;
};

/// F^i = sum_j (linear_ij z^j + antilinear_ij zbar^j) + shift_i + sum of terms.
/// Empty `linear` means the identity, empty `antilinear`/`shift` mean zero.
struct MapSpec {
  std::vector<cplx> linear;
  std::vector<cplx> antilinear;
  std::vector<cplx> shift;
  std::vector<TrigTerm> terms;
};

/// A perturbation of the identity of C^n sampled on the torus grid, with its
/// Jacobian blocks a_ij = dF^i/dz^j and b_ij = dF^i/dzbar^j evaluated
/// symbolically from the trigonometric terms.
class TorusMap {
 public:
  /// Throws PreconditionError when a term's frequency is not representable,
  /// or when |det| of the real Jacobian or of `a` drops below eps_jac anywhere.
  TorusMap(TorusGrid grid, MapSpec spec, double eps_jac = 1e-3);

  const TorusGrid& grid() const noexcept { return grid_; }
  const MapSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return grid_.dim(); }

  const ScalarField& a(int i, int j) const;
  const ScalarField& b(int i, int j) const;
  /// Sampled values of F^i including the linear part.
  ScalarField values(int i) const;
  /// Periodic part of F^i (trigonometric terms plus shift).
  ScalarField periodic_part(int i) const;
  /// min over grid points of |det| of the real 2n x 2n Jacobian.
  double min_jacobian_det() const noexcept { return min_det_; }

  /// Post-composition z -> A F + c with a holomorphic affine map.
  TorusMap compose_affine(std::span<const cplx> matrix, std::span<const cplx> shift) const;

 private:
  TorusGrid grid_;
  MapSpec spec_;
  double eps_jac_;
  std::vector<ScalarField> a_;
  std::vector<ScalarField> b_;
  double min_det_ = 0.0;
};

/// phi^i_kbar = a^{ij} dF^j/dzbar^k.
BeltramiField beltrami_from_map(const TorusMap& map);

/// Per-jbar L2 norm of
///   a^{ik} dbar_j a_{ki} - phi^i_jbar a^{pl} d_i a_{lp} - d_i phi^i_jbar,
/// all derivatives spectral. Throws ShapeError when phi is not the field of `map`.
std::vector<double> claim_identity_residual(const TorusMap& map, const BeltramiField& phi);

struct FiniteDistance {
  bool ok = false;
  /// min over grid points of |det(I - phi phibar)|
  double margin = 0.0;
};
FiniteDistance finite_distance_check(const BeltramiField& phi, double neighborhood = 1e-3);

/// Random terms e^{i k.x} supported on the axes of complex coordinate
/// `coordinate`, |k| <= band per axis, attached to component `component`.
std::vector<TrigTerm> random_terms(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                   int component, int coordinate, double amplitude);

/// F^i = z^i + s^i(z^i): each component perturbed only in its own coordinate.
/// The resulting phi is diagonal with phi^i_ibar depending on z^i alone, which
/// keeps discrete integrability exact.
MapSpec random_separable_map(const TorusGrid& grid, std::mt19937_64& rng, int band,
                             double amplitude);
/// Every component perturbed in every coordinate.
MapSpec random_coupled_map(const TorusGrid& grid, std::mt19937_64& rng, int band,
                           double amplitude);
/// Rescale the trigonometric terms of `spec` so that sup_norm of the
/// resulting phi equals `target` (bisection; target must lie in (0, 1)).
MapSpec scale_to_sup_norm(const TorusGrid& grid, const MapSpec& spec, double target,
                          double rel_tol = 1e-6);

/// Band-limited integrable fields that need no map: phi^i_ibar = u_i(z^i).
BeltramiField separable_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                 double amplitude);
/// n = 2: phi^1 = c dzbar1 + w(z2) dzbar2, phi^2 = v(z2) dzbar2.
BeltramiField triangular_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                  double amplitude);

}  // namespace hodge
