#include "hodge/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hodge/error.hpp"

namespace hodge {

namespace {

// Determinant of a small dense complex matrix (row-major, size d x d).
cplx small_det(std::array<cplx, 16> m, int d) {
  cplx det = 1.0;
  for (int c = 0; c < d; ++c) {
    int pivot = c;
    for (int r = c + 1; r < d; ++r) {
      if (std::abs(m[static_cast<std::size_t>(r * d + c)]) >
          std::abs(m[static_cast<std::size_t>(pivot * d + c)])) {
        pivot = r;
      }
    }
    if (pivot != c) {
      for (int k = 0; k < d; ++k) {
        std::swap(m[static_cast<std::size_t>(c * d + k)], m[static_cast<std::size_t>(pivot * d + k)]);
      }
      det = -det;
    }
    const cplx p = m[static_cast<std::size_t>(c * d + c)];
    if (p == cplx(0.0)) return 0.0;
    det *= p;
    for (int r = c + 1; r < d; ++r) {
      const cplx f = m[static_cast<std::size_t>(r * d + c)] / p;
      for (int k = c; k < d; ++k) {
        m[static_cast<std::size_t>(r * d + k)] -= f * m[static_cast<std::size_t>(c * d + k)];
      }
    }
  }
  return det;
}

cplx entry_or(const std::vector<cplx>& v, std::size_t idx, cplx fallback) {
  return v.empty() ? fallback : v[idx];
}

double plane_wave_phase(const std::array<int, 4>& k, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) s += k[a] * x[a];
  return s;
}

// d/dz_j and d/dzbar_j of e^{i k.x}
cplx dz_factor(const std::array<int, 4>& k, int j) {
  return 0.5 * cplx(k[static_cast<std::size_t>(2 * j + 1)], k[static_cast<std::size_t>(2 * j)]);
}
cplx dzbar_factor(const std::array<int, 4>& k, int j) {
  return 0.5 * cplx(-k[static_cast<std::size_t>(2 * j + 1)], k[static_cast<std::size_t>(2 * j)]);
}

// Inverse of the pointwise n x n matrix field m(i,j).
template <class Get>
std::vector<ScalarField> pointwise_inverse(const TorusGrid& grid, Get&& m) {
  const int n = grid.dim();
  std::vector<ScalarField> inv;
  for (int k = 0; k < n * n; ++k) inv.emplace_back(grid);
  if (n == 1) {
    const auto& a = m(0, 0);
    for (std::size_t x = 0; x < grid.size(); ++x) inv[0][x] = 1.0 / a[x];
    return inv;
  }
  const auto& a00 = m(0, 0);
  const auto& a01 = m(0, 1);
  const auto& a10 = m(1, 0);
  const auto& a11 = m(1, 1);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const cplx det = a00[x] * a11[x] - a01[x] * a10[x];
    inv[0][x] = a11[x] / det;
    inv[1][x] = -a01[x] / det;
    inv[2][x] = -a10[x] / det;
    inv[3][x] = a00[x] / det;
  }
  return inv;
}

}  // namespace

TorusMap::TorusMap(TorusGrid grid, MapSpec spec, double eps_jac)
    : grid_(std::move(grid)), spec_(std::move(spec)), eps_jac_(eps_jac) {
  const int n = grid_.dim();
  const auto nn = static_cast<std::size_t>(n * n);
  if ((!spec_.linear.empty() && spec_.linear.size() != nn) ||
      (!spec_.antilinear.empty() && spec_.antilinear.size() != nn) ||
      (!spec_.shift.empty() && spec_.shift.size() != static_cast<std::size_t>(n))) {
    throw ShapeError("map linear part must be n x n and shift of length n");
  }
  const int N = grid_.samples_per_axis();
  for (const auto& t : spec_.terms) {
    if (t.component < 0 || t.component >= n) throw PreconditionError("term component out of range");
    for (int ax = 0; ax < 4; ++ax) {
      const int k = t.frequency[static_cast<std::size_t>(ax)];
      if (ax >= 2 * n ? k != 0 : std::abs(k) >= N / 2) {
        throw PreconditionError("term frequency " + std::to_string(k) +
                                " is not resolved on N=" + std::to_string(N));
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto idx = static_cast<std::size_t>(i * n + j);
      a_.push_back(ScalarField::constant(grid_, entry_or(spec_.linear, idx, i == j ? 1.0 : 0.0)));
      b_.push_back(ScalarField::constant(grid_, entry_or(spec_.antilinear, idx, 0.0)));
    }
  }
  const int d = grid_.real_dim();
  std::array<double, 4> x{};
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const auto idx = grid_.unflatten(p);
    for (int ax = 0; ax < d; ++ax) x[static_cast<std::size_t>(ax)] = grid_.coordinate(idx[static_cast<std::size_t>(ax)]);
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(d));
    for (const auto& t : spec_.terms) {
      const double th = plane_wave_phase(t.frequency, xs);
      const cplx wave = t.coefficient * cplx(std::cos(th), std::sin(th));
      for (int j = 0; j < n; ++j) {
        const auto slot = static_cast<std::size_t>(t.component * n + j);
        a_[slot][p] += dz_factor(t.frequency, j) * wave;
        b_[slot][p] += dzbar_factor(t.frequency, j) * wave;
      }
    }
  }

  min_det_ = std::numeric_limits<double>::infinity();
  double min_a = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    std::array<cplx, 16> m{};
    const int D = 2 * n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto s = static_cast<std::size_t>(i * n + j);
        m[static_cast<std::size_t>(i * D + j)] = a_[s][p];
        m[static_cast<std::size_t>(i * D + n + j)] = b_[s][p];
        m[static_cast<std::size_t>((n + i) * D + j)] = std::conj(b_[s][p]);
        m[static_cast<std::size_t>((n + i) * D + n + j)] = std::conj(a_[s][p]);
      }
    }
    min_det_ = std::min(min_det_, std::abs(small_det(m, D)));
    std::array<cplx, 16> am{};
    for (int s = 0; s < n * n; ++s) am[static_cast<std::size_t>(s)] = a_[static_cast<std::size_t>(s)][p];
    min_a = std::min(min_a, std::abs(small_det(am, n)));
  }
  if (min_det_ < eps_jac_ || min_a < eps_jac_) {
    throw PreconditionError("map Jacobian is singular or nearly so: min |det| = " +
                            show(std::min(min_det_, min_a)));
  }
}

const ScalarField& TorusMap::a(int i, int j) const {
  return a_[static_cast<std::size_t>(i * dim() + j)];
}

const ScalarField& TorusMap::b(int i, int j) const {
  return b_[static_cast<std::size_t>(i * dim() + j)];
}

ScalarField TorusMap::periodic_part(int i) const {
  const cplx shift = entry_or(spec_.shift, static_cast<std::size_t>(i), 0.0);
  return ScalarField::sample(grid_, [&](std::span<const double> x) {
    cplx v = shift;
    for (const auto& t : spec_.terms) {
      if (t.component != i) continue;
      const double th = plane_wave_phase(t.frequency, x);
      v += t.coefficient * cplx(std::cos(th), std::sin(th));
    }
    return v;
  });
}

ScalarField TorusMap::values(int i) const {
  const int n = dim();
  auto out = periodic_part(i);
  const auto lin = ScalarField::sample(grid_, [&](std::span<const double> x) {
    cplx v = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto idx = static_cast<std::size_t>(i * n + j);
      const cplx z(x[static_cast<std::size_t>(2 * j)], x[static_cast<std::size_t>(2 * j + 1)]);
      v += entry_or(spec_.linear, idx, i == j ? 1.0 : 0.0) * z +
           entry_or(spec_.antilinear, idx, 0.0) * std::conj(z);
    }
    return v;
  });
  out += lin;
  return out;
}

TorusMap TorusMap::compose_affine(std::span<const cplx> matrix, std::span<const cplx> shift) const {
  const int n = dim();
  const auto nn = static_cast<std::size_t>(n * n);
  if (matrix.size() != nn || shift.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("affine map must be n x n with a shift of length n");
  }
  MapSpec out;
  out.linear.assign(nn, 0.0);
  out.antilinear.assign(nn, 0.0);
  out.shift.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    out.shift[static_cast<std::size_t>(i)] = shift[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) {
      const cplx A = matrix[static_cast<std::size_t>(i * n + k)];
      out.shift[static_cast<std::size_t>(i)] += A * entry_or(spec_.shift, static_cast<std::size_t>(k), 0.0);
      for (int j = 0; j < n; ++j) {
        const auto kj = static_cast<std::size_t>(k * n + j);
        out.linear[static_cast<std::size_t>(i * n + j)] += A * entry_or(spec_.linear, kj, k == j ? 1.0 : 0.0);
        out.antilinear[static_cast<std::size_t>(i * n + j)] += A * entry_or(spec_.antilinear, kj, 0.0);
      }
    }
  }
  for (const auto& t : spec_.terms) {
    for (int i = 0; i < n; ++i) {
      const cplx A = matrix[static_cast<std::size_t>(i * n + t.component)];
      if (A == cplx(0.0)) continue;
      out.terms.push_back({i, t.frequency, A * t.coefficient});
    }
  }
  return TorusMap(grid_, std::move(out), eps_jac_);
}

BeltramiField beltrami_from_map(const TorusMap& map) {
  const auto& grid = map.grid();
  const int n = map.dim();
  const auto inv = pointwise_inverse(grid, [&](int i, int j) -> const ScalarField& { return map.a(i, j); });
  BeltramiField phi(grid, 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      ScalarField c(grid);
      for (int j = 0; j < n; ++j) c += inv[static_cast<std::size_t>(i * n + j)] * map.b(j, k);
      phi.coefficient(i, k) = std::move(c);
    }
  }
  return phi;
}

std::vector<double> claim_identity_residual(const TorusMap& map, const BeltramiField& phi) {
  const auto& grid = map.grid();
  const int n = map.dim();
  {
    auto diff = beltrami_from_map(map);
    const double scale = diff.l2_norm();
    diff -= phi;
    if (diff.l2_norm() > 1e-12 * (1.0 + scale)) {
      throw ShapeError("Beltrami field does not belong to this map");
    }
  }
  const auto inv = pointwise_inverse(grid, [&](int i, int j) -> const ScalarField& { return map.a(i, j); });
  auto ainv = [&](int i, int j) -> const ScalarField& { return inv[static_cast<std::size_t>(i * n + j)]; };

  // trace(a^{-1} d_i a) for each i
  std::vector<ScalarField> tr_del;
  for (int i = 0; i < n; ++i) {
    ScalarField t(grid);
    for (int p = 0; p < n; ++p) {
      for (int l = 0; l < n; ++l) {
        t += ainv(p, l) * complex_derivative(map.a(l, p), i, DerivativeKind::dz);
      }
    }
    tr_del.push_back(std::move(t));
  }

  std::vector<double> out;
  for (int j = 0; j < n; ++j) {
    ScalarField r(grid);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        r += ainv(i, k) * complex_derivative(map.a(k, i), j, DerivativeKind::dzbar);
      }
      r -= phi.coefficient(i, j) * tr_del[static_cast<std::size_t>(i)];
      r -= complex_derivative(phi.coefficient(i, j), i, DerivativeKind::dz);
    }
    out.push_back(l2_norm(r));
  }
  return out;
}

FiniteDistance finite_distance_check(const BeltramiField& phi, double neighborhood) {
  if (phi.valence() != 1) throw PreconditionError("finite_distance_check needs valence 1");
  const auto& grid = phi.grid();
  const int n = phi.dim();
  std::vector<ScalarField> c;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) c.push_back(to_physical(phi.coefficient(i, j)));
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < grid.size(); ++x) {
    std::array<cplx, 16> m{};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx s = i == j ? 1.0 : 0.0;
        for (int k = 0; k < n; ++k) {
          s -= c[static_cast<std::size_t>(i * n + k)][x] * std::conj(c[static_cast<std::size_t>(k * n + j)][x]);
        }
        m[static_cast<std::size_t>(i * n + j)] = s;
      }
    }
    margin = std::min(margin, std::abs(small_det(m, n)));
  }
  return {margin > neighborhood, margin};
}

std::vector<TrigTerm> random_terms(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                   int component, int coordinate, double amplitude) {
  if (2 * band >= grid.samples_per_axis()) throw PreconditionError("band limit must stay below N/2");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<TrigTerm> terms;
  for (int kx = -band; kx <= band; ++kx) {
    for (int ky = -band; ky <= band; ++ky) {
      if (kx == 0 && ky == 0) continue;
      TrigTerm t;
      t.component = component;
      t.frequency[static_cast<std::size_t>(2 * coordinate)] = kx;
      t.frequency[static_cast<std::size_t>(2 * coordinate + 1)] = ky;
      const double re = normal(rng);
      const double im = normal(rng);
      t.coefficient = amplitude * cplx(re, im) / (1.0 + kx * kx + ky * ky);
      terms.push_back(t);
    }
  }
  return terms;
}

MapSpec random_separable_map(const TorusGrid& grid, std::mt19937_64& rng, int band,
                             double amplitude) {
  MapSpec spec;
  for (int i = 0; i < grid.dim(); ++i) {
    auto t = random_terms(grid, rng, band, i, i, amplitude);
    spec.terms.insert(spec.terms.end(), t.begin(), t.end());
  }
  return spec;
}

MapSpec random_coupled_map(const TorusGrid& grid, std::mt19937_64& rng, int band,
                           double amplitude) {
  MapSpec spec;
  for (int i = 0; i < grid.dim(); ++i) {
    for (int c = 0; c < grid.dim(); ++c) {
      auto t = random_terms(grid, rng, band, i, c, amplitude);
      spec.terms.insert(spec.terms.end(), t.begin(), t.end());
    }
  }
  return spec;
}

MapSpec scale_to_sup_norm(const TorusGrid& grid, const MapSpec& spec, double target,
                          double rel_tol) {
  if (!(target > 0.0 && target < 1.0)) throw PreconditionError("target sup norm must lie in (0,1)");
  if (spec.terms.empty()) throw PreconditionError("map has no perturbation to scale");
  const int n = grid.dim();
  // Jacobian blocks split into the fixed linear part and the scaled terms
  MapSpec linear_only = spec;
  linear_only.terms.clear();
  MapSpec terms_only;
  terms_only.linear.assign(static_cast<std::size_t>(n * n), 0.0);
  terms_only.terms = spec.terms;
  const TorusMap lin(grid, linear_only, 0.0);
  const TorusMap pert(grid, terms_only, 0.0);

  // sup norm of phi for the scaled map, +inf when `a` degenerates
  auto measure = [&](double s) {
    double best = 0.0;
    for (std::size_t x = 0; x < grid.size(); ++x) {
      std::array<cplx, 4> a{};
      std::array<cplx, 4> b{};
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const auto k = static_cast<std::size_t>(i * n + j);
          a[k] = lin.a(i, j)[x] + s * pert.a(i, j)[x];
          b[k] = lin.b(i, j)[x] + s * pert.b(i, j)[x];
        }
      }
      if (n == 1) {
        if (std::abs(a[0]) < 1e-12) return std::numeric_limits<double>::infinity();
        best = std::max(best, std::abs(b[0] / a[0]));
        continue;
      }
      const cplx det = a[0] * a[3] - a[1] * a[2];
      if (std::abs(det) < 1e-12) return std::numeric_limits<double>::infinity();
      const std::array<cplx, 4> inv{a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
      std::array<cplx, 4> phi{};
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
          for (int j = 0; j < 2; ++j) {
            phi[static_cast<std::size_t>(i * 2 + k)] +=
                inv[static_cast<std::size_t>(i * 2 + j)] * b[static_cast<std::size_t>(j * 2 + k)];
          }
        }
      }
      double frob = 0.0;
      for (auto v : phi) frob += std::norm(v);
      const double d = std::abs(phi[0] * phi[3] - phi[1] * phi[2]);
      best = std::max(best, 0.5 * (frob + std::sqrt(std::max(0.0, frob * frob - 4.0 * d * d))));
    }
    return n == 1 ? best : std::sqrt(best);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; measure(hi) < target; ++it) {
    if (it > 60) throw PreconditionError("could not reach the requested sup norm");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (measure(mid) < target ? lo : hi) = mid;
  }
  MapSpec out = spec;
  for (auto& t : out.terms) t.coefficient *= 0.5 * (lo + hi);
  return out;
}

BeltramiField separable_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                 double amplitude) {
  BeltramiField phi(grid, 1);
  for (int i = 0; i < grid.dim(); ++i) {
    phi.coefficient(i, i) = random_band_limited_in(grid, rng, band, i, amplitude);
  }
  return phi;
}

BeltramiField triangular_beltrami(const TorusGrid& grid, std::mt19937_64& rng, int band,
                                  double amplitude) {
  if (grid.dim() != 2) throw PreconditionError("triangular_beltrami needs n = 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  BeltramiField phi(grid, 1);
  const double re = normal(rng);
  const double im = normal(rng);
  phi.coefficient(0, 0) = ScalarField::constant(grid, 0.5 * amplitude * cplx(re, im));
  phi.coefficient(0, 1) = random_band_limited_in(grid, rng, band, 1, amplitude);
  phi.coefficient(1, 1) = random_band_limited_in(grid, rng, band, 1, amplitude);
  return phi;
}

}  // namespace hodge
