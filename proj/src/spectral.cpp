#include "hodge/spectral.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "hodge/error.hpp"
#include "hodge/kernels.hpp"

namespace hodge {

ScalarField transform(const ScalarField& field, Direction direction) {
  const auto& grid = field.grid();
  if (direction == Direction::forward) {
    if (field.representation() != Representation::physical) {
      throw ShapeError("forward transform expects a physical field");
    }
    ScalarField out(grid, Representation::spectral);
    grid.forward_fft(field.values(), out.values());
    return out;
  }
  if (field.representation() != Representation::spectral) {
    throw ShapeError("inverse transform expects a spectral field");
  }
  ScalarField out(grid, Representation::physical);
  grid.inverse_fft(field.values(), out.values());
  return out;
}

ScalarField to_spectral(const ScalarField& field) {
  return field.representation() == Representation::spectral ? field
                                                             : transform(field, Direction::forward);
}

ScalarField to_physical(const ScalarField& field) {
  return field.representation() == Representation::physical ? field
                                                            : transform(field, Direction::inverse);
}

namespace {

template <class M>
ScalarField apply_symbol(const ScalarField& field, std::span<const M> symbol) {
  if (symbol.size() != field.size()) throw ShapeError("multiplier size does not match field");
  const bool physical = field.representation() == Representation::physical;
  ScalarField spec = to_spectral(field);
  kernels::parallel::multiply(spec.values(), symbol);
  return physical ? to_physical(spec) : spec;
}

}  // namespace

ScalarField complex_derivative(const ScalarField& field, int a, DerivativeKind kind) {
  const auto& grid = field.grid();
  const auto symbol = kind == DerivativeKind::dz ? grid.dz_symbol(a) : grid.dzbar_symbol(a);
  return apply_symbol(field, symbol);
}

ScalarField multiplier_apply(const ScalarField& field, std::span<const cplx> multiplier) {
  return apply_symbol(field, multiplier);
}

ScalarField multiplier_apply(const ScalarField& field, std::span<const double> multiplier) {
  return apply_symbol(field, multiplier);
}

ScalarField scalar_laplacian(const ScalarField& field) {
  const auto k2 = field.grid().wave_number_sq();
  std::vector<double> symbol(k2.begin(), k2.end());
  for (auto& v : symbol) v = -v;
  return apply_symbol(field, std::span<const double>(symbol));
}

cplx inner(const ScalarField& f, const ScalarField& g) {
  if (!(f.grid() == g.grid())) throw ShapeError("fields live on different grids");
  const auto& grid = f.grid();
  if (f.representation() != g.representation()) {
    return inner(to_spectral(f), to_spectral(g));
  }
  const cplx s = kernels::parallel::sum_conj_product(f.values(), g.values());
  if (f.representation() == Representation::spectral) return grid.volume() * s;
  return grid.volume() * s / static_cast<double>(grid.size());
}

double l2_norm(const ScalarField& f) {
  const auto& grid = f.grid();
  const double s = kernels::parallel::sum_norm2(f.values());
  if (f.representation() == Representation::spectral) return std::sqrt(grid.volume() * s);
  return std::sqrt(grid.volume() * s / static_cast<double>(grid.size()));
}

double sup_abs(const ScalarField& f) {
  return kernels::parallel::max_abs(to_physical(f).values());
}

double mean_abs(const ScalarField& f) {
  const auto p = to_physical(f);
  double s = 0.0;
  for (const auto& v : p.values()) s += std::abs(v);
  return s / static_cast<double>(p.size());
}

namespace {

// Visits every frequency vector with |k_a| <= band on the selected axes and
// zero on the others, in a fixed order.
template <class Visit>
void for_each_band_frequency(const TorusGrid& grid, int band, int first_axis, int last_axis,
                             Visit&& visit) {
  if (2 * band >= grid.samples_per_axis()) {
    throw PreconditionError("band limit must stay below N/2");
  }
  const int d = grid.real_dim();
  std::array<int, 4> k{};
  const int width = 2 * band + 1;
  int count = 1;
  for (int a = first_axis; a < last_axis; ++a) count *= width;
  for (int c = 0; c < count; ++c) {
    int rem = c;
    k.fill(0);
    for (int a = first_axis; a < last_axis; ++a) {
      k[static_cast<std::size_t>(a)] = rem % width - band;
      rem /= width;
    }
    visit(std::span<const int>(k.data(), static_cast<std::size_t>(d)));
  }
}

double decay(std::span<const int> k) {
  double s = 0.0;
  for (int v : k) s += static_cast<double>(v) * v;
  return 1.0 / (1.0 + s);
}

ScalarField random_on_axes(const TorusGrid& grid, std::mt19937_64& rng, int band, int first,
                           int last, double amplitude,
                           Representation rep = Representation::physical) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ScalarField spec(grid, Representation::spectral);
  for_each_band_frequency(grid, band, first, last, [&](std::span<const int> k) {
    const double re = normal(rng);
    const double im = normal(rng);
    spec[grid.frequency_slot(k)] = amplitude * decay(k) * cplx(re, im);
  });
  return rep == Representation::spectral ? spec : to_physical(spec);
}

}  // namespace

ScalarField random_band_limited(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                double amplitude, Representation rep) {
  return random_on_axes(grid, rng, band, 0, grid.real_dim(), amplitude, rep);
}

ScalarField random_band_limited_in(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                   int complex_coordinate, double amplitude) {
  if (complex_coordinate < 0 || complex_coordinate >= grid.dim()) {
    throw PreconditionError("complex coordinate out of range");
  }
  return random_on_axes(grid, rng, band, 2 * complex_coordinate, 2 * complex_coordinate + 2,
                        amplitude);
}

ScalarField random_real_band_limited(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                     double amplitude) {
  auto f = random_band_limited(grid, rng, band, amplitude);
  for (auto& v : f.values()) v = cplx(v.real(), 0.0);
  return f;
}

}  // namespace hodge
