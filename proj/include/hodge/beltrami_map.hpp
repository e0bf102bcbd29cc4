#pragma once
#include <iosfwd>

#include "hodge/deformation.hpp"
#include "hodge/extension.hpp"

namespace hodge {

/// f(z) = A z + B zbar + periodic(z) on the plane covering the torus (n = 1).
/// Quasi-periodic by construction: f(z + lambda) = f(z) + A lambda + B conj(lambda).
struct QuasiPeriodicMap {
  TorusGrid grid;
  cplx A = 1.0;
  cplx B = 0.0;
  ScalarField periodic;

  ScalarField values() const;
  /// df/dz = A + d(periodic)/dz, spectrally.
  ScalarField dz() const;
  ScalarField dzbar() const;
  /// |A| - |B|; positive for orientation-preserving maps.
  double orientation_margin() const;
};

/// h solving dbar h + d'(mu _| h) = 0 with harmonic part h0 = c dz.
ExtensionResult solve_one_form(const BeltramiField& mu, const FormField& h0,
                               const SolveOptions& options = {});

struct OneFormPrimitive {
  cplx A = 0.0;
  cplx B = 0.0;
  ScalarField potential;
  /// ||omega - (A dz + B dzbar + d potential)|| / ||omega||
  double reconstruction_error = 0.0;
};

/// Split a closed 1-form into its mean and an exact part. The potential is
/// the spectral least-squares antiderivative of the mean-free part.
OneFormPrimitive integrate_closed_one_form(const FormField& omega_10, const FormField& omega_01,
                                           double closed_tol = 1e-8);
OneFormPrimitive integrate_closed_one_form(const MixedForm& omega, double closed_tol = 1e-8);

struct BeltramiMapReport {
  SolveReport solve;
  /// sup |dbar f - mu df| / sup |df|
  double pointwise_residual = 0.0;
  /// ||(1,0) part of e^{i_mu} h / A - df|| / ||df||
  double split_holomorphic = 0.0;
  /// ||(0,1) part of e^{i_mu} h / A - mu df|| / ||df||
  double split_antiholomorphic = 0.0;
  double reconstruction_error = 0.0;
  double orientation_margin = 0.0;
  /// Unnormalized coefficients of the primitive of e^{i_mu} h.
  cplx raw_A = 0.0;
  cplx raw_B = 0.0;
};

struct BeltramiMapResult {
  QuasiPeriodicMap map;
  BeltramiMapReport report;
};

/// Solve dbar f = mu df, normalized so that f(0) = 0 and A = 1.
BeltramiMapResult solve_beltrami_map(const BeltramiField& mu, const SolveOptions& options = {});

struct ManufacturedMu {
  BeltramiField mu;
  double sup_norm = 0.0;
  /// min over grid points of |F_z|^2 - |F_zbar|^2
  double orientation_margin = 0.0;
};

/// mu = F_zbar / F_z for a map of the torus (n = 1).
ManufacturedMu manufactured_mu(const TorusMap& F);

/// CSV with columns x, y, Re f, Im f, |dbar f - mu df|.
void write_map_csv(std::ostream& out, const QuasiPeriodicMap& f, const BeltramiField& mu);

}  // namespace hodge
