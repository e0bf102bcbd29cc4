#pragma once

#include <compare>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hodge/grid.hpp"
#include "hodge/spectral.hpp"

namespace hodge {

struct Bidegree {
  int p = 0;
  int q = 0;
  auto operator<=>(const Bidegree&) const = default;
};

/// Multi-index bookkeeping. A basis monomial dz^I ^ dzbar^J is a bitmask:
/// bit a (0 <= a < n) is dz^{a+1}, bit n+b is dzbar^{b+1}. The canonical
/// ordering of a monomial is by increasing bit, i.e. holomorphic factors first.
namespace basis {

/// Masks of bidegree (p,q) in storage order; empty when (p,q) is out of range.
const std::vector<unsigned>& masks(int n, Bidegree deg);
/// Storage slot of `mask` in bidegree `deg`, or -1.
int slot(int n, Bidegree deg, unsigned mask);
/// Sign s with (monomial a) ^ (monomial b) = s * (monomial a|b); 0 on overlap.
int wedge_sign(unsigned a, unsigned b);
Bidegree bidegree_of(int n, unsigned mask);
/// Pointwise squared norm of a basis monomial: 2 per factor.
double monomial_norm2(unsigned mask);

}  // namespace basis

/// A (p,q)-form: one ScalarField per canonical monomial of bidegree (p,q).
///
/// Bidegrees outside [0,n]^2 are allowed and denote the structurally zero
/// form (no components); that is what degree overflow and underflow produce.
/// `weight` counts tensor factors of the canonical bundle, (dZ)^{weight}, and
/// is only used by the pluricanonical checks.
class FormField {
 public:
  FormField(TorusGrid grid, Bidegree deg, Representation rep = Representation::physical,
            int weight = 0);

  const TorusGrid& grid() const noexcept { return grid_; }
  Bidegree bidegree() const noexcept { return deg_; }
  int degree() const noexcept { return deg_.p + deg_.q; }
  int weight() const noexcept { return weight_; }
  void set_weight(int w) noexcept { weight_ = w; }
  Representation representation() const noexcept { return rep_; }
  bool structurally_zero() const noexcept { return comps_.empty(); }

  std::span<const unsigned> masks() const;
  std::size_t component_count() const noexcept { return comps_.size(); }
  ScalarField& component(std::size_t slot) { return comps_[slot]; }
  const ScalarField& component(std::size_t slot) const { return comps_[slot]; }
  /// Component of a monomial; throws ShapeError when the mask is not of this bidegree.
  ScalarField& at(unsigned mask);
  const ScalarField& at(unsigned mask) const;

  FormField& operator+=(const FormField& other);
  FormField& operator-=(const FormField& other);
  FormField& operator*=(cplx s);
  FormField& add_scaled(cplx alpha, const FormField& other);
  friend FormField operator+(FormField a, const FormField& b) { return a += b; }
  friend FormField operator-(FormField a, const FormField& b) { return a -= b; }
  friend FormField operator*(cplx s, FormField a) { return a *= s; }

  FormField spectral() const;
  FormField physical() const;

  void check_same_shape(const FormField& other) const;

 private:
  TorusGrid grid_;
  Bidegree deg_;
  int weight_;
  Representation rep_;
  std::vector<ScalarField> comps_;
};

/// A form that may mix several bidegrees (results of d, e^{i_phi}, ...).
class MixedForm {
 public:
  MixedForm() = default;
  explicit MixedForm(FormField part);

  void add(const FormField& part, cplx scale = 1.0);
  MixedForm& operator+=(const MixedForm& other);
  MixedForm& operator-=(const MixedForm& other);
  MixedForm& operator*=(cplx s);
  friend MixedForm operator+(MixedForm a, const MixedForm& b) { return a += b; }
  friend MixedForm operator-(MixedForm a, const MixedForm& b) { return a -= b; }

  /// Part of the given bidegree, or nullptr when absent.
  const FormField* part(Bidegree deg) const;
  const std::map<Bidegree, FormField>& parts() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }

 private:
  std::map<Bidegree, FormField> parts_;
};

/// T^{1,0}-valued (0,k)-form: component i is the (0,k)-form coefficient of d/dz^i.
class BeltramiField {
 public:
  BeltramiField(TorusGrid grid, int valence = 1);

  const TorusGrid& grid() const noexcept { return grid_; }
  int valence() const noexcept { return valence_; }
  int dim() const noexcept { return grid_.dim(); }

  FormField& vector_component(int i) { return comps_[static_cast<std::size_t>(i)]; }
  const FormField& vector_component(int i) const { return comps_[static_cast<std::size_t>(i)]; }
  /// phi^i_{jbar} for valence 1 (0-based i, j).
  ScalarField& coefficient(int i, int j);
  const ScalarField& coefficient(int i, int j) const;

  BeltramiField& operator+=(const BeltramiField& other);
  BeltramiField& operator-=(const BeltramiField& other);
  BeltramiField& operator*=(cplx s);
  friend BeltramiField operator+(BeltramiField a, const BeltramiField& b) { return a += b; }
  friend BeltramiField operator-(BeltramiField a, const BeltramiField& b) { return a -= b; }
  friend BeltramiField operator*(cplx s, BeltramiField a) { return a *= s; }

  /// sup over grid points of the largest singular value of (phi^i_{jbar})
  /// (valence 1 only).
  double sup_norm() const;
  /// L2 norm in the flat frame: sqrt(sum_i ||component i||^2).
  double l2_norm() const;

 private:
  TorusGrid grid_;
  int valence_;
  std::vector<FormField> comps_;
};

// --- construction helpers ---------------------------------------------------

/// Constant-coefficient form; `coeffs` follows basis::masks order.
FormField constant_form(const TorusGrid& grid, Bidegree deg, std::span<const cplx> coeffs);
/// The top holomorphic monomial dz^1 ^ ... ^ dz^n scaled by c.
FormField volume_form(const TorusGrid& grid, cplx c = 1.0);
FormField random_form(const TorusGrid& grid, Bidegree deg, std::mt19937_64& rng, int band,
                      double amplitude = 1.0, Representation rep = Representation::physical);
/// Constant Beltrami differential from a row-major n x n matrix phi^i_{jbar}.
BeltramiField constant_beltrami(const TorusGrid& grid, std::span<const cplx> matrix);
BeltramiField random_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                              double amplitude);

// --- metric --------------------------------------------------------------------

/// L2 inner product with <dz^a, dz^b> = 2 delta_ab and the flat volume form.
cplx inner(const FormField& a, const FormField& b);
double l2_norm(const FormField& f);
double l2_norm(const MixedForm& f);
/// sup over grid points of the pointwise metric norm.
double sup_norm(const FormField& f);

// --- algebra ---------------------------------------------------------------------

FormField wedge(const FormField& a, const FormField& b);
/// Left multiplication by the basis covector with the given bit.
FormField wedge_basis(unsigned bit, const FormField& f);
/// Interior product with the dual basis vector of `bit` (d/dz^a or d/dzbar^b).
FormField interior_basis(unsigned bit, const FormField& f);
/// Componentwise d/dz_a or d/dzbar_a of the coefficients.
FormField coefficient_derivative(const FormField& f, int a, DerivativeKind kind);
/// Multiply every component by a scalar field (physical).
FormField multiply(const ScalarField& s, const FormField& f);

/// The (1,0) and (0,1) parts of d. Degree overflow gives the zero form.
FormField partial(const FormField& f);
FormField dbar(const FormField& f);
MixedForm exterior_derivative(const FormField& f);
MixedForm exterior_derivative(const MixedForm& f);

/// i_phi(sigma) = sum_i phi^i ^ i_{d/dz^i} sigma, bidegree (p-1, q+k).
FormField contract(const BeltramiField& phi, const FormField& sigma);
MixedForm contract(const BeltramiField& phi, const MixedForm& sigma);

/// e^{i_phi} sigma = sum_{k<=p} i_phi^k sigma / k!.
MixedForm exp_contraction(const BeltramiField& phi, const FormField& sigma);
MixedForm exp_contraction(const BeltramiField& phi, const MixedForm& sigma);

BeltramiField lie_bracket(const BeltramiField& phi, const BeltramiField& psi);
BeltramiField dbar_beltrami(const BeltramiField& phi);
/// || dbar phi - [phi,phi]/2 || (valence 1).
double integrability_residual(const BeltramiField& phi);

struct LieDerivativeParts {
  FormField holomorphic;      ///< (-1)^k d' i_phi + i_phi d'
  FormField antiholomorphic;  ///< (-1)^k dbar i_phi + i_phi dbar
};
LieDerivativeParts lie_derivative_parts(const BeltramiField& phi, const FormField& sigma);

/// || i_{[phi,psi]} sigma - (L_phi i_psi - i_psi L_phi) sigma ||
double cartan_residual(const BeltramiField& phi, const BeltramiField& psi,
                       const FormField& sigma);
/// || [phi,phi] _| sigma - (2 phi _| d' phi _| sigma - d'(phi _| phi _| sigma)
///                          - phi _| phi _| d' sigma) ||
double cartan_special_residual(const BeltramiField& phi, const FormField& sigma);

struct ConjugationResidual {
  MixedForm general;     ///< e^{-i_phi} d e^{i_phi} sigma - (d - L_phi - i_{[phi,phi]/2}) sigma
  MixedForm integrable;  ///< e^{-i_phi} d e^{i_phi} sigma - (d + d' i_phi - i_phi d') sigma
  double general_norm = 0.0;
  double integrable_norm = 0.0;
};
ConjugationResidual conjugation_residual(const BeltramiField& phi, const FormField& sigma);

}  // namespace hodge
