#include "hodge/beltrami_map.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "hodge/error.hpp"

namespace hodge {

namespace {

void require_dim1(const TorusGrid& grid, const char* what) {
  if (grid.dim() != 1) throw PreconditionError(std::string(what) + " needs complex dimension 1");
}

ScalarField coordinate_z(const TorusGrid& grid, bool conjugate) {
  return ScalarField::sample(grid, [&](std::span<const double> x) {
    return cplx(x[0], conjugate ? -x[1] : x[1]);
  });
}

}  // namespace

ScalarField QuasiPeriodicMap::values() const {
  auto f = to_physical(periodic);
  f.add_scaled(A, coordinate_z(grid, false));
  f.add_scaled(B, coordinate_z(grid, true));
  return f;
}

ScalarField QuasiPeriodicMap::dz() const {
  auto d = to_physical(complex_derivative(periodic, 0, DerivativeKind::dz));
  d += ScalarField::constant(grid, A);
  return d;
}

ScalarField QuasiPeriodicMap::dzbar() const {
  auto d = to_physical(complex_derivative(periodic, 0, DerivativeKind::dzbar));
  d += ScalarField::constant(grid, B);
  return d;
}

double QuasiPeriodicMap::orientation_margin() const { return std::abs(A) - std::abs(B); }

ExtensionResult solve_one_form(const BeltramiField& mu, const FormField& h0,
                               const SolveOptions& options) {
  require_dim1(mu.grid(), "solve_one_form");
  return solve_extension(h0, mu, options);
}

OneFormPrimitive integrate_closed_one_form(const FormField& omega_10, const FormField& omega_01,
                                           double closed_tol) {
  const auto& grid = omega_10.grid();
  require_dim1(grid, "integrate_closed_one_form");
  if (omega_10.bidegree() != Bidegree{1, 0} || omega_01.bidegree() != Bidegree{0, 1}) {
    throw ShapeError("integrate_closed_one_form expects a (1,0) and a (0,1) part");
  }
  if (!(omega_01.grid() == grid)) throw ShapeError("parts live on different grids");

  MixedForm omega(omega_10);
  omega.add(omega_01);
  const double norm = l2_norm(omega);
  const double scale = norm > 0.0 ? norm : 1.0;
  const double closed = l2_norm(exterior_derivative(omega)) / scale;
  if (closed > closed_tol) {
    throw PreconditionError("form is not closed: ||d omega|| / ||omega|| = " + show(closed));
  }

  const auto alpha = to_spectral(omega_10.at(0b01));
  const auto beta = to_spectral(omega_01.at(0b10));
  OneFormPrimitive out{alpha[0], beta[0], ScalarField(grid, Representation::spectral), 0.0};

  // normal equations of min ||d'p - alpha'||^2 + ||dbar p - beta'||^2: the
  // operator is |k|^2 / 2, whose inverse is the Green symbol
  const auto s = grid.dz_symbol(0);
  const auto t = grid.dzbar_symbol(0);
  const auto g = grid.green_symbol();
  auto p = out.potential.values();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    p[i] = (std::conj(s[i]) * alpha[i] + std::conj(t[i]) * beta[i]) * g[i];
  }
  out.potential = to_physical(out.potential);

  FormField a10(grid, Bidegree{1, 0});
  a10.at(0b01) = to_physical(complex_derivative(out.potential, 0, DerivativeKind::dz));
  a10.at(0b01) += ScalarField::constant(grid, out.A);
  FormField a01(grid, Bidegree{0, 1});
  a01.at(0b10) = to_physical(complex_derivative(out.potential, 0, DerivativeKind::dzbar));
  a01.at(0b10) += ScalarField::constant(grid, out.B);
  MixedForm rebuilt(a10);
  rebuilt.add(a01);
  out.reconstruction_error = l2_norm(omega - rebuilt) / scale;
  return out;
}

OneFormPrimitive integrate_closed_one_form(const MixedForm& omega, double closed_tol) {
  const auto* a = omega.part({1, 0});
  const auto* b = omega.part({0, 1});
  if (a == nullptr && b == nullptr) throw ShapeError("integrate_closed_one_form: empty form");
  const auto& grid = a != nullptr ? a->grid() : b->grid();
  for (const auto& [deg, _] : omega.parts()) {
    if (deg.p + deg.q != 1) throw ShapeError("integrate_closed_one_form expects a 1-form");
  }
  return integrate_closed_one_form(a != nullptr ? *a : FormField(grid, {1, 0}),
                                   b != nullptr ? *b : FormField(grid, {0, 1}), closed_tol);
}

BeltramiMapResult solve_beltrami_map(const BeltramiField& mu, const SolveOptions& options) {
  const auto& grid = mu.grid();
  require_dim1(grid, "solve_beltrami_map");
  const FormField h0 = volume_form(grid);
  auto solved = solve_one_form(mu, h0, options);
  const auto pushed = exp_contraction(mu, solved.omega);
  const auto prim = integrate_closed_one_form(pushed, 1e-8);
  if (std::abs(prim.A) == 0.0) throw ConvergenceError("primitive has vanishing linear part");

  BeltramiMapResult out{QuasiPeriodicMap{grid, 1.0, prim.B / prim.A, prim.potential}, {}};
  auto& periodic = out.map.periodic;
  periodic -= ScalarField::constant(grid, periodic[0]);
  periodic *= 1.0 / prim.A;

  auto& rep = out.report;
  rep.solve = std::move(solved.report);
  rep.raw_A = prim.A;
  rep.raw_B = prim.B;
  rep.reconstruction_error = prim.reconstruction_error;
  rep.orientation_margin = out.map.orientation_margin();

  const auto df = out.map.dz();
  const auto dbf = out.map.dzbar();
  const auto& m = mu.coefficient(0, 0);
  const auto mu_df = to_physical(m) * df;
  rep.pointwise_residual = sup_abs(dbf - mu_df) / sup_abs(df);

  const double df_norm = l2_norm(df);
  const auto* p10 = pushed.part({1, 0});
  const auto* p01 = pushed.part({0, 1});
  ScalarField hol = p10 != nullptr ? to_physical(p10->at(0b01)) : ScalarField(grid);
  ScalarField anti = p01 != nullptr ? to_physical(p01->at(0b10)) : ScalarField(grid);
  hol *= 1.0 / prim.A;
  anti *= 1.0 / prim.A;
  rep.split_holomorphic = l2_norm(hol - df) / df_norm;
  rep.split_antiholomorphic = l2_norm(anti - mu_df) / df_norm;
  return out;
}

ManufacturedMu manufactured_mu(const TorusMap& F) {
  const auto& grid = F.grid();
  require_dim1(grid, "manufactured_mu");
  const auto a = to_physical(F.a(0, 0));
  const auto b = to_physical(F.b(0, 0));
  double min_a = std::abs(a[0]);
  double margin = std::norm(a[0]) - std::norm(b[0]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    min_a = std::min(min_a, std::abs(a[i]));
    margin = std::min(margin, std::norm(a[i]) - std::norm(b[i]));
  }
  if (min_a < 1e-12) throw PreconditionError("F_z vanishes on the grid");
  ManufacturedMu out{beltrami_from_map(F), 0.0, margin};
  out.sup_norm = out.mu.sup_norm();
  return out;
}

void write_map_csv(std::ostream& out, const QuasiPeriodicMap& f, const BeltramiField& mu) {
  const auto& grid = f.grid;
  const auto values = f.values();
  const auto res = f.dzbar() - to_physical(mu.coefficient(0, 0)) * f.dz();
  out << "x,y,re_f,im_f,residual\n";
  out.precision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    out << grid.coordinate(idx[0]) << ',' << grid.coordinate(idx[1]) << ',' << values[i].real()
        << ',' << values[i].imag() << ',' << std::abs(res[i]) << '\n';
  }
}

}  // namespace hodge
