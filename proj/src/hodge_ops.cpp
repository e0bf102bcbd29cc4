#include "hodge/hodge_ops.hpp"

#include "hodge/error.hpp"
#include "hodge/kernels.hpp"

namespace hodge {

HodgePackage::HodgePackage(TorusGrid grid) : grid_(std::move(grid)) {}

FormField HodgePackage::dolbeault(const FormField& f, Dolbeault which) const {
  return which == Dolbeault::del ? partial(f) : dbar(f);
}

FormField HodgePackage::dolbeault_adjoint(const FormField& f, Dolbeault which) const {
  const int n = grid_.dim();
  const bool del = which == Dolbeault::del;
  const Bidegree deg = del ? Bidegree{f.bidegree().p - 1, f.bidegree().q}
                           : Bidegree{f.bidegree().p, f.bidegree().q - 1};
  FormField out(f.grid(), deg, Representation::spectral, f.weight());
  if (!out.structurally_zero() && !f.structurally_zero()) {
    const auto fs = f.spectral();
    const auto m = fs.masks();
    for (int a = 0; a < n; ++a) {
      // i_{d/dzbar^a} pairs with d/dz_a and i_{d/dz^a} with d/dzbar_a
      const auto symbol = del ? grid_.dzbar_symbol(a) : grid_.dz_symbol(a);
      const unsigned bit = 1u << (del ? a : n + a);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if ((m[i] & bit) == 0u) continue;
        const unsigned rest = m[i] & ~bit;
        const int sign = basis::wedge_sign(bit, rest);
        kernels::parallel::accumulate_multiplied(out.at(rest).values(), -2.0 * sign, symbol,
                                                 fs.component(i).values());
      }
    }
  }
  return f.representation() == Representation::physical ? out.physical() : out;
}

FormField HodgePackage::laplacian_dbar(const FormField& f) const {
  const auto fs = f.spectral();
  auto out = dbar(dolbeault_adjoint(fs, Dolbeault::dbar));
  out += dolbeault_adjoint(dbar(fs), Dolbeault::dbar);
  return f.representation() == Representation::physical ? out.physical() : out;
}

FormField HodgePackage::laplacian_del(const FormField& f) const {
  const auto fs = f.spectral();
  auto out = partial(dolbeault_adjoint(fs, Dolbeault::del));
  out += dolbeault_adjoint(partial(fs), Dolbeault::del);
  return f.representation() == Representation::physical ? out.physical() : out;
}

FormField HodgePackage::apply_multiplier(const FormField& f, std::span<const double> symbol) const {
  if (!(f.grid() == grid_)) throw ShapeError("form lives on a different grid");
  FormField out(f.grid(), f.bidegree(), f.representation(), f.weight());
  for (std::size_t i = 0; i < f.component_count(); ++i) {
    out.component(i) = multiplier_apply(f.component(i), symbol);
  }
  return out;
}

FormField HodgePackage::green(const FormField& f) const {
  return apply_multiplier(f, grid_.green_symbol());
}

FormField HodgePackage::harmonic_projection(const FormField& f) const {
  return apply_multiplier(f, grid_.kernel_indicator());
}

FormField HodgePackage::t_operator(const FormField& f) const {
  const auto fs = f.spectral();
  auto out = dolbeault_adjoint(green(partial(fs)), Dolbeault::dbar);
  return f.representation() == Representation::physical ? out.physical() : out;
}

FormNorms HodgePackage::norms(const FormField& f) const { return {l2_norm(f), sup_norm(f)}; }

EnergyTerms HodgePackage::energy_terms(const FormField& g) const {
  const auto gs = g.spectral();
  EnergyTerms e;
  const double t = l2_norm(t_operator(gs));
  e.t_norm2 = t * t;
  const double gn = l2_norm(gs);
  e.g_norm2 = gn * gn;
  const double h = l2_norm(harmonic_projection(gs));
  e.harmonic_norm2 = h * h;
  const auto ds = dolbeault_adjoint(gs, Dolbeault::del);
  if (!ds.structurally_zero()) e.del_star_green = inner(ds, green(ds)).real();
  const double b = l2_norm(dbar(green(partial(gs))));
  e.dbar_green_del_norm2 = b * b;
  return e;
}

}  // namespace hodge
