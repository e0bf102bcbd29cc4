#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "hodge/grid.hpp"

namespace hodge {

enum class Direction { forward, inverse };
enum class DerivativeKind { dz, dzbar };

/// Flip the representation. forward: physical -> spectral.
ScalarField transform(const ScalarField& field, Direction direction);
ScalarField to_spectral(const ScalarField& field);
ScalarField to_physical(const ScalarField& field);

/// d/dz_a or d/dzbar_a (a is 0-based), applied spectrally. The result has
/// the same representation as the input.
ScalarField complex_derivative(const ScalarField& field, int a, DerivativeKind kind);

/// Pointwise product in spectral space; representation is preserved.
ScalarField multiplier_apply(const ScalarField& field, std::span<const cplx> multiplier);
ScalarField multiplier_apply(const ScalarField& field, std::span<const double> multiplier);

/// Scalar Laplacian sum_a (d^2/dx_a^2 + d^2/dy_a^2), built from the same
/// Nyquist-free symbols as the first derivatives.
ScalarField scalar_laplacian(const ScalarField& field);

/// Quadrature inner product  (2pi)^{2n} * mean(f conj(g)); works in either
/// representation (Parseval).
cplx inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);
double sup_abs(const ScalarField& f);
double mean_abs(const ScalarField& f);

/// Seeded random field with spectral support |k_a| <= band on every real axis.
/// Coefficients are complex Gaussians scaled by amplitude / (1 + |k|^2).
ScalarField random_band_limited(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                double amplitude = 1.0,
                                Representation rep = Representation::physical);
/// Same, restricted to frequencies along the axes of one complex coordinate.
ScalarField random_band_limited_in(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                   int complex_coordinate, double amplitude = 1.0);
/// Real-valued variant (Hermitian-symmetric spectrum).
ScalarField random_real_band_limited(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                     double amplitude = 1.0);

}  // namespace hodge
