#pragma once
#include <array>
#include <random>
#include <vector>

#include "hodge/error.hpp"
#include "hodge/forms.hpp"

namespace hodge {

/// psi gets c e^{i k.x} + conj(c) e^{-i k.x}, so the potential is real.
struct PotentialTerm {
  std::array<int, 4> frequency{};
  cplx coefficient = 0.0;
};

/// A flat torus patch carrying the Kahler metric g_{i jbar} = delta_ij + d_i dbar_j psi.
///
/// Everything derived from the metric is computed once: det g, log det g and
/// l_i = d_i log det g, the latter as tr(g^{-1} d_i g) so that only the
/// band-limited third derivatives of psi are taken spectrally.
class KahlerPatch {
 public:
  /// Flat patch (psi = 0).
  explicit KahlerPatch(TorusGrid grid);
  /// Throws PreconditionError when a frequency is unresolved, or when the
  /// smallest eigenvalue of g over the grid is <= min_margin.
  KahlerPatch(TorusGrid grid, std::vector<PotentialTerm> terms, double min_margin = 0.0);

  const TorusGrid& grid() const noexcept { return grid_; }
  const std::vector<PotentialTerm>& terms() const noexcept { return terms_; }
  bool flat() const noexcept { return terms_.empty(); }
  const ScalarField& potential() const noexcept { return psi_; }
  const ScalarField& metric(int i, int j) const;
  const ScalarField& det() const noexcept { return det_; }
  const ScalarField& log_det() const noexcept { return log_det_; }
  const ScalarField& dlog_det(int i) const;
  /// min over the grid of the smallest eigenvalue of g
  double positivity_margin() const noexcept { return margin_; }
  /// max |d_k g_{i lbar} - d_i g_{k lbar}|
  double kahler_symmetry_defect() const;
  /// ||d omega|| / ||omega|| for omega = (i/2) g_{i jbar} dz^i ^ dzbar^j
  double kahler_form_closedness() const;
  /// The (1,1)-form omega above.
  FormField kahler_form() const;

 private:
  TorusGrid grid_;
  std::vector<PotentialTerm> terms_;
  ScalarField psi_;
  std::vector<ScalarField> g_;
  std::vector<ScalarField> dlog_;
  ScalarField det_;
  ScalarField log_det_;
  double margin_ = 1.0;
};

/// Random potential with |k| <= band per axis and coefficients
/// amplitude * N(0,1) / (1 + |k|^2).
std::vector<PotentialTerm> random_potential(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                            double amplitude);

/// f dZ (x) e with e = dZ^{m-1}: an (n,0)-form of weight m - 1.
FormField pluri_form(const ScalarField& f, int m);

/// (d_i phi^i_jbar + phi^i_jbar d_i log det g) dzbar^j
FormField div_beltrami(const BeltramiField& phi, const KahlerPatch& patch);

/// theta = -(m-1) d_i log det g dz^i, so that nabla' e = theta (x) e.
FormField connection_form(const KahlerPatch& patch, int m);

/// nabla'(alpha (x) e) = d'alpha (x) e + (-1)^{deg alpha} alpha ^ theta (x) e.
/// Throws PreconditionError unless alpha has weight m - 1.
FormField nabla_prime(const FormField& alpha, const KahlerPatch& patch, int m);

/// dbar sigma + nabla'(phi _| sigma) - (m-1) div phi ^ sigma
FormField psi_defect(const FormField& sigma, const BeltramiField& phi, const KahlerPatch& patch,
                     int m);

/// The same form assembled coefficientwise on dzbar^j ^ dZ:
///   dbar_j f - d_i(f phi^i_jbar) - (m-1) f d_i phi^i_jbar.
FormField psi_defect_local(const FormField& sigma, const BeltramiField& phi,
                           const KahlerPatch& patch, int m);

/// Residual of the scalar system  dbar_j f = phi^i_jbar d_i f + m f d_i phi^i_jbar,
/// one field per j.
std::vector<ScalarField> local_equation_residual(const ScalarField& f, const BeltramiField& phi,
                                                 int m);

struct CouplingResult {
  /// ||Psi|| / ||sigma||
  double global_residual = 0.0;
  /// sqrt(2^{n+1}) ||local residual|| / ||sigma||, the same quantity through the scalar system
  double local_residual = 0.0;
  bool both_small = false;
  bool both_large = false;
  /// both small, or both large with matching magnitudes
  bool consistent = false;
};

CouplingResult coupling_test(const FormField& sigma, const BeltramiField& phi,
                             const KahlerPatch& patch, int m, double tol = 1e-8,
                             double coupling = 1e-6);

/// ||dbar(nabla'(phi _| sigma) - (m-1) div phi ^ sigma)
///   + nabla'(phi _| Psi) - (m-1) div phi ^ Psi|| / (||sigma|| + 1).
/// n = 2 only (the identity is vacuous for n = 1); phi must be integrable.
double defect_propagation_residual(const FormField& sigma, const BeltramiField& phi,
                                   const KahlerPatch& patch, int m,
                                   double integrability_tol = 1e-8);

}  // namespace hodge
