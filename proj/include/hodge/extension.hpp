#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hodge/error.hpp"
#include "hodge/forms.hpp"
#include "hodge/hodge_ops.hpp"

namespace hodge {

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 400;
  /// Largest accepted integrability residual of phi.
  double integrability_tol = 1e-8;
};

struct SolveReport {
  int iterations = 0;
  /// ||Omega_{k+1} - Omega_k|| / ||Omega_0|| per iteration
  std::vector<double> residual_history;
  /// ||dbar Omega + d'(phi _| Omega)|| / ||Omega_0||
  double extension_residual = 0.0;
  /// ||d(e^{i_phi} Omega)|| / ||Omega_0||
  double dclosed_residual = 0.0;
  /// ||Omega - Omega_0 + T(phi _| Omega)|| / ||Omega_0||
  double fixed_point_residual = 0.0;
  /// ||H Omega - Omega_0|| / ||Omega_0||
  double harmonic_defect = 0.0;
  /// ||d' sigma|| / ||sigma_0||; only meaningful for the (p,q) system
  double del_residual = 0.0;
  double contraction_ratio = 0.0;
  double sup_norm = 0.0;
  bool converged = false;
};

/// Raised when the iteration does not reach its tolerance; carries the trace.
class SolveFailure : public ConvergenceError {
 public:
  SolveFailure(const std::string& what, SolveReport report)
      : ConvergenceError(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct ExtensionResult {
  FormField omega;
  SolveReport report;
};

/// Solve Omega = Omega_0 - T(phi _| Omega) by successive substitution.
///
/// Omega_0 must be an (n,0)-form with constant coefficients, phi integrable
/// with sup_norm < 1. Convergence needs both the fixed-point change and the
/// independently recomputed extension residual at or below tol.
ExtensionResult solve_extension(const FormField& omega0, const BeltramiField& phi,
                                const SolveOptions& options = {},
                                const FormField* initial = nullptr);

struct ExtendResult {
  MixedForm pushed;  ///< e^{i_phi} Omega
  FormField omega;
  SolveReport report;
};
ExtendResult extend(const FormField& omega0, const BeltramiField& phi,
                    const SolveOptions& options = {});

/// Largest pairwise distance (relative to ||Omega_0||) between the solutions
/// reached from the given initial iterates.
double uniqueness_gap(const FormField& omega0, const BeltramiField& phi,
                      std::span<const FormField> seeds, const SolveOptions& options = {});

/// Same iteration for a constant-coefficient (p,q)-form sigma_0 with p >= 1;
/// the report additionally records ||d' sigma||.
ExtensionResult solve_pq_extension(const FormField& sigma0, const BeltramiField& phi,
                                   const SolveOptions& options = {});

}  // namespace hodge
