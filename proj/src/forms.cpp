#include "hodge/forms.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "hodge/error.hpp"
#include "hodge/kernels.hpp"

namespace hodge {

// ---------------------------------------------------------------------------
// basis

namespace basis {

namespace {

struct MaskTable {
  // tables[n-1][p][q]
  std::array<std::array<std::array<std::vector<unsigned>, 3>, 3>, 2> tables;

  MaskTable() {
    for (int n = 1; n <= 2; ++n) {
      for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
        const auto deg = bidegree_of(n, mask);
        tables[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(deg.p)]
              [static_cast<std::size_t>(deg.q)]
                  .push_back(mask);
      }
    }
  }
};

const MaskTable& table() {
  static const MaskTable t;
  return t;
}

}  // namespace

Bidegree bidegree_of(int n, unsigned mask) {
  const unsigned holo = mask & ((1u << n) - 1u);
  const unsigned anti = mask >> n;
  return {std::popcount(holo), std::popcount(anti)};
}

const std::vector<unsigned>& masks(int n, Bidegree deg) {
  static const std::vector<unsigned> empty;
  if (n < 1 || n > 2 || deg.p < 0 || deg.q < 0 || deg.p > n || deg.q > n) return empty;
  return table().tables[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(deg.p)]
                       [static_cast<std::size_t>(deg.q)];
}

int slot(int n, Bidegree deg, unsigned mask) {
  const auto& m = masks(n, deg);
  const auto it = std::find(m.begin(), m.end(), mask);
  return it == m.end() ? -1 : static_cast<int>(it - m.begin());
}

int wedge_sign(unsigned a, unsigned b) {
  if ((a & b) != 0u) return 0;
  int swaps = 0;
  for (unsigned rest = b; rest != 0u; rest &= rest - 1u) {
    const int y = std::countr_zero(rest);
    const unsigned above = ~((2u << y) - 1u);
    swaps += std::popcount(a & above);
  }
  return (swaps % 2 == 0) ? 1 : -1;
}

double monomial_norm2(unsigned mask) { return std::ldexp(1.0, std::popcount(mask)); }

}  // namespace basis

// ---------------------------------------------------------------------------
// FormField

FormField::FormField(TorusGrid grid, Bidegree deg, Representation rep, int weight)
    : grid_(std::move(grid)), deg_(deg), weight_(weight), rep_(rep) {
  const auto& m = basis::masks(grid_.dim(), deg_);
  comps_.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) comps_.emplace_back(grid_, rep_);
}

std::span<const unsigned> FormField::masks() const { return basis::masks(grid_.dim(), deg_); }

ScalarField& FormField::at(unsigned mask) {
  const int s = basis::slot(grid_.dim(), deg_, mask);
  if (s < 0) throw ShapeError("monomial is not of this form's bidegree");
  return comps_[static_cast<std::size_t>(s)];
}

const ScalarField& FormField::at(unsigned mask) const {
  const int s = basis::slot(grid_.dim(), deg_, mask);
  if (s < 0) throw ShapeError("monomial is not of this form's bidegree");
  return comps_[static_cast<std::size_t>(s)];
}

void FormField::check_same_shape(const FormField& other) const {
  if (!(grid_ == other.grid_)) throw ShapeError("forms live on different grids");
  if (deg_ != other.deg_) {
    throw ShapeError("bidegree mismatch: (" + std::to_string(deg_.p) + "," +
                     std::to_string(deg_.q) + ") vs (" + std::to_string(other.deg_.p) + "," +
                     std::to_string(other.deg_.q) + ")");
  }
}

FormField& FormField::operator+=(const FormField& other) { return add_scaled(1.0, other); }
FormField& FormField::operator-=(const FormField& other) { return add_scaled(-1.0, other); }

FormField& FormField::operator*=(cplx s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

FormField& FormField::add_scaled(cplx alpha, const FormField& other) {
  check_same_shape(other);
  if (rep_ != other.rep_) {
    const auto converted = rep_ == Representation::physical ? other.physical() : other.spectral();
    return add_scaled(alpha, converted);
  }
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i].add_scaled(alpha, other.comps_[i]);
  return *this;
}

FormField FormField::spectral() const {
  if (rep_ == Representation::spectral) return *this;
  FormField out(grid_, deg_, Representation::spectral, weight_);
  for (std::size_t i = 0; i < comps_.size(); ++i) out.comps_[i] = to_spectral(comps_[i]);
  return out;
}

FormField FormField::physical() const {
  if (rep_ == Representation::physical) return *this;
  FormField out(grid_, deg_, Representation::physical, weight_);
  for (std::size_t i = 0; i < comps_.size(); ++i) out.comps_[i] = to_physical(comps_[i]);
  return out;
}

// ---------------------------------------------------------------------------
// MixedForm

MixedForm::MixedForm(FormField part) { add(part); }

void MixedForm::add(const FormField& part, cplx scale) {
  if (part.structurally_zero()) return;
  auto it = parts_.find(part.bidegree());
  if (it == parts_.end()) {
    FormField copy = part;
    if (scale != cplx(1.0)) copy *= scale;
    parts_.emplace(part.bidegree(), std::move(copy));
  } else {
    it->second.add_scaled(scale, part);
  }
}

MixedForm& MixedForm::operator+=(const MixedForm& other) {
  for (const auto& [deg, f] : other.parts_) add(f);
  return *this;
}

MixedForm& MixedForm::operator-=(const MixedForm& other) {
  for (const auto& [deg, f] : other.parts_) add(f, -1.0);
  return *this;
}

MixedForm& MixedForm::operator*=(cplx s) {
  for (auto& [deg, f] : parts_) f *= s;
  return *this;
}

const FormField* MixedForm::part(Bidegree deg) const {
  const auto it = parts_.find(deg);
  return it == parts_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// BeltramiField

BeltramiField::BeltramiField(TorusGrid grid, int valence) : grid_(std::move(grid)), valence_(valence) {
  if (valence < 0) throw PreconditionError("valence must be non-negative");
  for (int i = 0; i < grid_.dim(); ++i) comps_.emplace_back(grid_, Bidegree{0, valence_});
}

ScalarField& BeltramiField::coefficient(int i, int j) {
  if (valence_ != 1) throw PreconditionError("coefficient(i,j) needs valence 1");
  return comps_[static_cast<std::size_t>(i)].at(1u << (grid_.dim() + j));
}

const ScalarField& BeltramiField::coefficient(int i, int j) const {
  if (valence_ != 1) throw PreconditionError("coefficient(i,j) needs valence 1");
  return comps_[static_cast<std::size_t>(i)].at(1u << (grid_.dim() + j));
}

BeltramiField& BeltramiField::operator+=(const BeltramiField& other) {
  if (valence_ != other.valence_) throw ShapeError("valence mismatch");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += other.comps_[i];
  return *this;
}

BeltramiField& BeltramiField::operator-=(const BeltramiField& other) {
  if (valence_ != other.valence_) throw ShapeError("valence mismatch");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= other.comps_[i];
  return *this;
}

BeltramiField& BeltramiField::operator*=(cplx s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

double BeltramiField::sup_norm() const {
  if (valence_ != 1) throw PreconditionError("sup_norm is defined for valence 1");
  const int n = dim();
  if (n == 1) return sup_abs(coefficient(0, 0));
  const auto a = to_physical(coefficient(0, 0));
  const auto b = to_physical(coefficient(0, 1));
  const auto c = to_physical(coefficient(1, 0));
  const auto d = to_physical(coefficient(1, 1));
  double best = 0.0;
  for (std::size_t x = 0; x < grid_.size(); ++x) {
    const double frob = std::norm(a[x]) + std::norm(b[x]) + std::norm(c[x]) + std::norm(d[x]);
    const double det = std::abs(a[x] * d[x] - b[x] * c[x]);
    const double disc = std::max(0.0, frob * frob - 4.0 * det * det);
    best = std::max(best, 0.5 * (frob + std::sqrt(disc)));
  }
  return std::sqrt(best);
}

double BeltramiField::l2_norm() const {
  double s = 0.0;
  for (const auto& c : comps_) {
    const double v = hodge::l2_norm(c);
    s += v * v;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// construction helpers

FormField constant_form(const TorusGrid& grid, Bidegree deg, std::span<const cplx> coeffs) {
  FormField f(grid, deg);
  if (coeffs.size() != f.component_count()) {
    throw ShapeError("constant_form expects " + std::to_string(f.component_count()) +
                     " coefficients");
  }
  for (std::size_t i = 0; i < coeffs.size(); ++i) f.component(i) = ScalarField::constant(grid, coeffs[i]);
  return f;
}

FormField volume_form(const TorusGrid& grid, cplx c) {
  const std::array<cplx, 1> coeff{c};
  return constant_form(grid, {grid.dim(), 0}, coeff);
}

FormField random_form(const TorusGrid& grid, Bidegree deg, std::mt19937_64& rng, int band,
                      double amplitude, Representation rep) {
  FormField f(grid, deg, rep);
  for (std::size_t i = 0; i < f.component_count(); ++i) {
    f.component(i) = random_band_limited(grid, rng, band, amplitude, rep);
  }
  return f;
}

BeltramiField constant_beltrami(const TorusGrid& grid, std::span<const cplx> matrix) {
  const int n = grid.dim();
  if (matrix.size() != static_cast<std::size_t>(n * n)) {
    throw ShapeError("constant_beltrami expects an n x n matrix");
  }
  BeltramiField phi(grid, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      phi.coefficient(i, j) = ScalarField::constant(grid, matrix[static_cast<std::size_t>(i * n + j)]);
    }
  }
  return phi;
}

BeltramiField random_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                              double amplitude) {
  BeltramiField phi(grid, 1);
  const int n = grid.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) phi.coefficient(i, j) = random_band_limited(grid, rng, band, amplitude);
  }
  return phi;
}

// ---------------------------------------------------------------------------
// metric

cplx inner(const FormField& a, const FormField& b) {
  a.check_same_shape(b);
  const auto m = a.masks();
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.component_count(); ++i) {
    s += basis::monomial_norm2(m[i]) * inner(a.component(i), b.component(i));
  }
  return s;
}

double l2_norm(const FormField& f) {
  const auto m = f.masks();
  double s = 0.0;
  for (std::size_t i = 0; i < f.component_count(); ++i) {
    const double v = l2_norm(f.component(i));
    s += basis::monomial_norm2(m[i]) * v * v;
  }
  return std::sqrt(s);
}

double l2_norm(const MixedForm& f) {
  double s = 0.0;
  for (const auto& [deg, part] : f.parts()) {
    const double v = l2_norm(part);
    s += v * v;
  }
  return std::sqrt(s);
}

double sup_norm(const FormField& f) {
  if (f.structurally_zero()) return 0.0;
  const auto phys = f.physical();
  const auto m = phys.masks();
  double best = 0.0;
  for (std::size_t x = 0; x < f.grid().size(); ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < phys.component_count(); ++i) {
      s += basis::monomial_norm2(m[i]) * std::norm(phys.component(i)[x]);
    }
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// algebra

FormField wedge(const FormField& a, const FormField& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("forms live on different grids");
  const int n = a.grid().dim();
  const Bidegree deg{a.bidegree().p + b.bidegree().p, a.bidegree().q + b.bidegree().q};
  FormField out(a.grid(), deg, Representation::physical, a.weight() + b.weight());
  if (out.structurally_zero() || a.structurally_zero() || b.structurally_zero()) return out;
  const auto pa = a.physical();
  const auto pb = b.physical();
  const auto ma = pa.masks();
  const auto mb = pb.masks();
  for (std::size_t i = 0; i < ma.size(); ++i) {
    for (std::size_t j = 0; j < mb.size(); ++j) {
      const int sign = basis::wedge_sign(ma[i], mb[j]);
      if (sign == 0) continue;
      const int s = basis::slot(n, deg, ma[i] | mb[j]);
      kernels::parallel::accumulate_product(out.component(static_cast<std::size_t>(s)).values(),
                                            static_cast<double>(sign), pa.component(i).values(),
                                            pb.component(j).values());
    }
  }
  return out;
}

FormField wedge_basis(unsigned bit, const FormField& f) {
  const int n = f.grid().dim();
  const auto d = basis::bidegree_of(n, 1u << bit);
  const Bidegree deg{f.bidegree().p + d.p, f.bidegree().q + d.q};
  FormField out(f.grid(), deg, f.representation(), f.weight());
  if (out.structurally_zero()) return out;
  const auto m = f.masks();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const int sign = basis::wedge_sign(1u << bit, m[i]);
    if (sign == 0) continue;
    out.at(m[i] | (1u << bit)).add_scaled(static_cast<double>(sign), f.component(i));
  }
  return out;
}

FormField interior_basis(unsigned bit, const FormField& f) {
  const int n = f.grid().dim();
  const auto d = basis::bidegree_of(n, 1u << bit);
  const Bidegree deg{f.bidegree().p - d.p, f.bidegree().q - d.q};
  FormField out(f.grid(), deg, f.representation(), f.weight());
  if (out.structurally_zero()) return out;
  const auto m = f.masks();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if ((m[i] & (1u << bit)) == 0u) continue;
    const unsigned rest = m[i] & ~(1u << bit);
    // e_bit ^ rest = sign * m[i]  =>  i_bit(m[i]) = sign * rest
    const int sign = basis::wedge_sign(1u << bit, rest);
    out.at(rest).add_scaled(static_cast<double>(sign), f.component(i));
  }
  return out;
}

FormField coefficient_derivative(const FormField& f, int a, DerivativeKind kind) {
  FormField out(f.grid(), f.bidegree(), f.representation(), f.weight());
  for (std::size_t i = 0; i < f.component_count(); ++i) {
    out.component(i) = complex_derivative(f.component(i), a, kind);
  }
  return out;
}

FormField multiply(const ScalarField& s, const FormField& f) {
  const auto ps = to_physical(s);
  const auto pf = f.physical();
  FormField out(f.grid(), f.bidegree(), Representation::physical, f.weight());
  for (std::size_t i = 0; i < f.component_count(); ++i) out.component(i) = ps * pf.component(i);
  return out;
}

namespace {

FormField dolbeault_part(const FormField& f, bool holomorphic) {
  const int n = f.grid().dim();
  const Bidegree deg = holomorphic ? Bidegree{f.bidegree().p + 1, f.bidegree().q}
                                   : Bidegree{f.bidegree().p, f.bidegree().q + 1};
  FormField out(f.grid(), deg, Representation::spectral, f.weight());
  if (!out.structurally_zero() && !f.structurally_zero()) {
    const auto fs = f.spectral();
    const auto m = fs.masks();
    for (int a = 0; a < n; ++a) {
      const auto symbol = holomorphic ? f.grid().dz_symbol(a) : f.grid().dzbar_symbol(a);
      const unsigned bit = 1u << (holomorphic ? a : n + a);
      for (std::size_t i = 0; i < m.size(); ++i) {
        const int sign = basis::wedge_sign(bit, m[i]);
        if (sign == 0) continue;
        kernels::parallel::accumulate_multiplied(out.at(m[i] | bit).values(), static_cast<double>(sign),
                                                 symbol, fs.component(i).values());
      }
    }
  }
  return f.representation() == Representation::physical ? out.physical() : out;
}

}  // namespace

FormField partial(const FormField& f) { return dolbeault_part(f, true); }
FormField dbar(const FormField& f) { return dolbeault_part(f, false); }

MixedForm exterior_derivative(const FormField& f) {
  MixedForm out;
  out.add(partial(f));
  out.add(dbar(f));
  return out;
}

MixedForm exterior_derivative(const MixedForm& f) {
  MixedForm out;
  for (const auto& [deg, part] : f.parts()) out += exterior_derivative(part);
  return out;
}

FormField contract(const BeltramiField& phi, const FormField& sigma) {
  if (!(phi.grid() == sigma.grid())) throw ShapeError("phi and sigma live on different grids");
  const Bidegree deg{sigma.bidegree().p - 1, sigma.bidegree().q + phi.valence()};
  FormField out(sigma.grid(), deg, Representation::physical, sigma.weight());
  if (out.structurally_zero()) return out;
  const auto ps = sigma.physical();
  for (int i = 0; i < phi.dim(); ++i) {
    out += wedge(phi.vector_component(i), interior_basis(static_cast<unsigned>(i), ps));
  }
  return out;
}

MixedForm contract(const BeltramiField& phi, const MixedForm& sigma) {
  MixedForm out;
  for (const auto& [deg, part] : sigma.parts()) out.add(contract(phi, part));
  return out;
}

MixedForm exp_contraction(const BeltramiField& phi, const FormField& sigma) {
  MixedForm out(sigma);
  if (sigma.structurally_zero()) return out;
  FormField term = sigma.physical();
  for (int k = 1; k <= sigma.bidegree().p; ++k) {
    term = contract(phi, term);
    term *= 1.0 / static_cast<double>(k);
    out.add(term);
  }
  return out;
}

MixedForm exp_contraction(const BeltramiField& phi, const MixedForm& sigma) {
  MixedForm out;
  for (const auto& [deg, part] : sigma.parts()) out += exp_contraction(phi, part);
  return out;
}

BeltramiField lie_bracket(const BeltramiField& phi, const BeltramiField& psi) {
  if (!(phi.grid() == psi.grid())) throw ShapeError("fields live on different grids");
  const int k = phi.valence();
  const int kp = psi.valence();
  const double sign = ((k * kp) % 2 == 0) ? 1.0 : -1.0;
  BeltramiField out(phi.grid(), k + kp);
  const int n = phi.dim();
  for (int j = 0; j < n; ++j) {
    FormField acc(phi.grid(), {0, k + kp});
    if (acc.structurally_zero()) continue;
    for (int i = 0; i < n; ++i) {
      acc += wedge(phi.vector_component(i),
                   coefficient_derivative(psi.vector_component(j), i, DerivativeKind::dz));
      acc.add_scaled(-sign, wedge(psi.vector_component(i),
                                  coefficient_derivative(phi.vector_component(j), i,
                                                         DerivativeKind::dz)));
    }
    out.vector_component(j) = std::move(acc);
  }
  return out;
}

BeltramiField dbar_beltrami(const BeltramiField& phi) {
  BeltramiField out(phi.grid(), phi.valence() + 1);
  for (int i = 0; i < phi.dim(); ++i) {
    out.vector_component(i) = dbar(phi.vector_component(i));
  }
  return out;
}

double integrability_residual(const BeltramiField& phi) {
  if (phi.valence() != 1) throw PreconditionError("integrability needs valence 1");
  auto r = dbar_beltrami(phi);
  auto bracket = lie_bracket(phi, phi);
  bracket *= 0.5;
  r -= bracket;
  return r.l2_norm();
}

LieDerivativeParts lie_derivative_parts(const BeltramiField& phi, const FormField& sigma) {
  const double sign = phi.valence() % 2 == 0 ? 1.0 : -1.0;
  const auto ip = contract(phi, sigma);
  auto hol = partial(ip);
  hol *= sign;
  hol += contract(phi, partial(sigma));
  auto anti = dbar(ip);
  anti *= sign;
  anti += contract(phi, dbar(sigma));
  return {std::move(hol), std::move(anti)};
}

double cartan_residual(const BeltramiField& phi, const BeltramiField& psi,
                       const FormField& sigma) {
  if (phi.valence() != 1 || psi.valence() != 1) {
    throw PreconditionError("cartan_residual needs valence-1 fields");
  }
  const auto lhs = contract(lie_bracket(phi, psi), sigma);
  const auto l_of_ipsi = lie_derivative_parts(phi, contract(psi, sigma));
  const auto l_sigma = lie_derivative_parts(phi, sigma);

  auto r1 = lhs - l_of_ipsi.holomorphic;
  r1 += contract(psi, l_sigma.holomorphic);
  auto r2 = l_of_ipsi.antiholomorphic - contract(psi, l_sigma.antiholomorphic);
  const double a = l2_norm(r1);
  const double b = l2_norm(r2);
  return std::sqrt(a * a + b * b);
}

double cartan_special_residual(const BeltramiField& phi, const FormField& sigma) {
  const auto lhs = contract(lie_bracket(phi, phi), sigma);
  const auto phi_sigma = contract(phi, sigma);
  auto rhs = contract(phi, partial(phi_sigma));
  rhs *= 2.0;
  rhs -= partial(contract(phi, phi_sigma));
  rhs -= contract(phi, contract(phi, partial(sigma)));
  return l2_norm(lhs - rhs);
}

ConjugationResidual conjugation_residual(const BeltramiField& phi, const FormField& sigma) {
  if (phi.valence() != 1) throw PreconditionError("conjugation_residual needs valence 1");
  auto minus_phi = phi;
  minus_phi *= -1.0;
  const auto lhs = exp_contraction(minus_phi, exterior_derivative(exp_contraction(phi, sigma)));
  const auto d_sigma = exterior_derivative(sigma);

  const auto lie = lie_derivative_parts(phi, sigma);
  auto half_bracket = lie_bracket(phi, phi);
  half_bracket *= 0.5;

  MixedForm general_rhs = d_sigma;
  general_rhs.add(lie.holomorphic, -1.0);
  general_rhs.add(lie.antiholomorphic, -1.0);
  general_rhs.add(contract(half_bracket, sigma), -1.0);

  MixedForm integrable_rhs = d_sigma;
  integrable_rhs.add(partial(contract(phi, sigma)));
  integrable_rhs.add(contract(phi, partial(sigma)), -1.0);

  ConjugationResidual out;
  out.general = lhs - general_rhs;
  out.integrable = lhs - integrable_rhs;
  out.general_norm = l2_norm(out.general);
  out.integrable_norm = l2_norm(out.integrable);
  return out;
}

}  // namespace hodge
