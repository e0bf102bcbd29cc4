#include "hodge/extension.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hodge {

namespace {

void check_inputs(const FormField& sigma0, const BeltramiField& phi, const SolveOptions& options,
                  const HodgePackage& hodge) {
  if (!(sigma0.grid() == phi.grid())) throw ShapeError("form and phi live on different grids");
  if (phi.valence() != 1) throw PreconditionError("phi must be a Beltrami differential (valence 1)");
  if (sigma0.bidegree().p < 1) throw PreconditionError("initial form needs holomorphic degree >= 1");
  if (options.tol <= 0.0 || options.max_iter < 1) throw PreconditionError("tol must be > 0, max_iter >= 1");
  const double norm = l2_norm(sigma0);
  const double defect = l2_norm(sigma0 - hodge.harmonic_projection(sigma0));
  if (defect > 1e-12 * std::max(norm, 1.0)) {
    throw PreconditionError("initial form must be harmonic (constant coefficients); ||sigma0 - H sigma0|| = " +
                            show(defect));
  }
  const double sup = phi.sup_norm();
  if (!(sup < 1.0)) {
    throw PreconditionError("sup_norm(phi) = " + show(sup) + " >= 1: no convergence guarantee");
  }
  const double integ = integrability_residual(phi);
  if (integ > options.integrability_tol) {
    throw PreconditionError("phi is not integrable: residual " + show(integ));
  }
}

double extension_equation_residual(const FormField& sigma, const BeltramiField& phi) {
  auto r = dbar(sigma);
  r += partial(contract(phi, sigma));
  return l2_norm(r);
}

ExtensionResult iterate(const FormField& sigma0, const BeltramiField& phi, const SolveOptions& options,
                        const FormField* initial) {
  const HodgePackage hodge(sigma0.grid());
  check_inputs(sigma0, phi, options, hodge);
  if (initial != nullptr) sigma0.check_same_shape(*initial);

  const double norm0 = l2_norm(sigma0);
  const double scale = norm0 > 0.0 ? norm0 : 1.0;
  SolveReport report;
  report.sup_norm = phi.sup_norm();

  FormField current = initial != nullptr ? initial->physical() : sigma0.physical();
  for (int k = 1; k <= options.max_iter; ++k) {
    FormField next = sigma0.physical();
    next -= hodge.t_operator(contract(phi, current));
    const double change = l2_norm(next - current) / scale;
    report.residual_history.push_back(change);
    report.iterations = k;
    current = std::move(next);
    if (change <= options.tol) {
      report.extension_residual = extension_equation_residual(current, phi) / scale;
      if (report.extension_residual <= options.tol) {
        report.converged = true;
        break;
      }
    }
  }

  const auto& h = report.residual_history;
  std::vector<double> ratios;
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i - 1] > 0.0 && h[i] > 0.0) ratios.push_back(h[i] / h[i - 1]);
  }
  if (!ratios.empty()) {
    // geometric mean over the tail, where the asymptotic rate has set in
    const std::size_t start = ratios.size() / 2;
    double logsum = 0.0;
    for (std::size_t i = start; i < ratios.size(); ++i) logsum += std::log(ratios[i]);
    report.contraction_ratio = std::exp(logsum / static_cast<double>(ratios.size() - start));
  }

  if (!report.converged) report.extension_residual = extension_equation_residual(current, phi) / scale;
  {
    auto fp = current - sigma0;
    fp += hodge.t_operator(contract(phi, current));
    report.fixed_point_residual = l2_norm(fp) / scale;
  }
  report.harmonic_defect = l2_norm(hodge.harmonic_projection(current) - sigma0) / scale;
  report.dclosed_residual = l2_norm(exterior_derivative(exp_contraction(phi, current))) / scale;
  report.del_residual = l2_norm(partial(current)) / scale;

  if (!report.converged) {
    const std::string what = "extension iteration did not converge in " +
                             std::to_string(options.max_iter) + " iterations (last change " +
                             show(h.back()) + ")";
    throw SolveFailure(what, std::move(report));
  }
  return {std::move(current), std::move(report)};
}

}  // namespace

ExtensionResult solve_extension(const FormField& omega0, const BeltramiField& phi,
                                const SolveOptions& options, const FormField* initial) {
  const int n = omega0.grid().dim();
  if (omega0.bidegree() != Bidegree{n, 0}) throw PreconditionError("Omega_0 must be an (n,0)-form");
  return iterate(omega0, phi, options, initial);
}

ExtendResult extend(const FormField& omega0, const BeltramiField& phi, const SolveOptions& options) {
  auto solved = solve_extension(omega0, phi, options);
  auto pushed = exp_contraction(phi, solved.omega);
  return {std::move(pushed), std::move(solved.omega), std::move(solved.report)};
}

double uniqueness_gap(const FormField& omega0, const BeltramiField& phi,
                      std::span<const FormField> seeds, const SolveOptions& options) {
  std::vector<FormField> solutions;
  for (const auto& s : seeds) solutions.push_back(solve_extension(omega0, phi, options, &s).omega);
  const double norm0 = l2_norm(omega0);
  const double scale = norm0 > 0.0 ? norm0 : 1.0;
  double gap = 0.0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < solutions.size(); ++j) {
      gap = std::max(gap, l2_norm(solutions[i] - solutions[j]) / scale);
    }
  }
  return gap;
}

ExtensionResult solve_pq_extension(const FormField& sigma0, const BeltramiField& phi,
                                   const SolveOptions& options) {
  return iterate(sigma0, phi, options, nullptr);
}

}  // namespace hodge
