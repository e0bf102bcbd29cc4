#include <doctest.h>

#include <cmath>
#include <random>

#include "hodge/deformation.hpp"
#include "hodge/error.hpp"
#include "oracles.hpp"

using namespace hodge;
using oracle::cplx;

TEST_CASE("identity and holomorphic maps give phi = 0") {
  for (int n : {1, 2}) {
    const TorusGrid g(n, 16);
    const TorusMap id(g, {});
    CHECK(beltrami_from_map(id).l2_norm() == 0.0);
    for (double r : claim_identity_residual(id, beltrami_from_map(id))) CHECK(r == 0.0);
    MapSpec shifted;
    shifted.shift.assign(static_cast<std::size_t>(n), cplx(0.3, -1.0));
    CHECK(beltrami_from_map(TorusMap(g, shifted)).l2_norm() == 0.0);
  }
}

TEST_CASE("affine map z + c zbar gives the constant c") {
  const TorusGrid g(1, 16);
  MapSpec s;
  s.antilinear = {cplx(0.25, 0.1)};
  const auto phi = beltrami_from_map(TorusMap(g, s));
  for (auto v : phi.coefficient(0, 0).values()) CHECK(std::abs(v - cplx(0.25, 0.1)) < 1e-15);
}

TEST_CASE("degenerate maps are rejected") {
  const TorusGrid g(1, 16);
  MapSpec s;
  s.antilinear = {cplx(1.0, 0.0)};
  CHECK_THROWS_AS(TorusMap(g, s), PreconditionError);
  MapSpec far;
  far.terms.push_back({0, {8, 0, 0, 0}, 0.1});
  CHECK_THROWS_AS(TorusMap(g, far), PreconditionError);
  MapSpec bad;
  bad.linear = {1.0, 0.0};
  CHECK_THROWS_AS(TorusMap(g, bad), ShapeError);
}

TEST_CASE("map-generated fields are integrable and satisfy the claim identity") {
  {
    const TorusGrid g(1, 64);
    std::mt19937_64 rng(1);
    const TorusMap F(g, random_separable_map(g, rng, 2, 0.1));
    const auto phi = beltrami_from_map(F);
    CHECK(integrability_residual(phi) == 0.0);
    CHECK(claim_identity_residual(F, phi)[0] <= 1e-8);
  }
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(2);
  for (const auto& spec : {random_separable_map(g, rng, 1, 0.05), random_coupled_map(g, rng, 1, 0.02)}) {
    const TorusMap F(g, spec);
    const auto phi = beltrami_from_map(F);
    CHECK(phi.sup_norm() > 0.0);
    CHECK(integrability_residual(phi) <= 1e-9);
    for (double r : claim_identity_residual(F, phi)) CHECK(r <= 1e-8);
  }
}

TEST_CASE("claim identity detects a foreign phi") {
  const TorusGrid g(1, 16);
  std::mt19937_64 rng(3);
  const TorusMap F(g, random_separable_map(g, rng, 1, 0.1));
  auto phi = beltrami_from_map(F);
  phi *= 1.01;
  CHECK_THROWS_AS(claim_identity_residual(F, phi), ShapeError);
}

TEST_CASE("post-composition with a holomorphic affine map leaves phi unchanged") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(4);
  const TorusMap F(g, random_coupled_map(g, rng, 1, 0.05));
  const std::array<cplx, 4> A{cplx(1.2, 0.3), 0.4, cplx(0.0, -0.5), 0.9};
  const std::array<cplx, 2> c{cplx(2.0, 1.0), -0.5};
  const auto phi = beltrami_from_map(F);
  auto diff = beltrami_from_map(F.compose_affine(A, c));
  diff -= phi;
  CHECK(diff.l2_norm() <= 1e-13 * phi.l2_norm());
}

TEST_CASE("pre-composition with a translation translates phi") {
  // F(z + c) with c a grid vector: the terms pick up phases e^{i k.c}
  const TorusGrid g(1, 16);
  std::mt19937_64 rng(5);
  const auto spec = random_separable_map(g, rng, 2, 0.1);
  const int shift = 3;
  const double c = g.coordinate(shift);
  MapSpec moved = spec;
  for (auto& t : moved.terms) t.coefficient *= std::polar(1.0, t.frequency[0] * c);
  const auto phi = beltrami_from_map(TorusMap(g, spec));
  const auto psi = beltrami_from_map(TorusMap(g, moved));
  double err = 0.0;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      const std::array<int, 2> at{i, j};
      const std::array<int, 2> from{(i + shift) % 16, j};
      err = std::max(err, std::abs(psi.coefficient(0, 0)[g.flatten(at)] - phi.coefficient(0, 0)[g.flatten(from)]));
    }
  }
  CHECK(err < 1e-14);
}

TEST_CASE("sup norm vanishes linearly in the perturbation amplitude") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(6);
  const auto base = random_coupled_map(g, rng, 1, 1.0);
  std::vector<double> slopes;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    MapSpec s = base;
    for (auto& t : s.terms) t.coefficient *= eps;
    slopes.push_back(beltrami_from_map(TorusMap(g, s)).sup_norm() / eps);
  }
  CHECK(std::isfinite(slopes[2]));
  CHECK(std::abs(slopes[1] - slopes[2]) <= 0.05 * slopes[2]);
  CHECK(std::abs(slopes[0] - slopes[2]) <= 0.5 * slopes[2]);
}

TEST_CASE("finite distance") {
  const TorusGrid g(2, 8);
  const auto zero = finite_distance_check(BeltramiField(g));
  CHECK(zero.ok);
  CHECK(zero.margin == 1.0);

  const TorusGrid g1(1, 8);
  const std::array<cplx, 1> half{std::polar(0.5, 0.7)};
  CHECK(std::abs(finite_distance_check(constant_beltrami(g1, half)).margin - 0.75) < 1e-15);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto phi = random_beltrami(g, rng, 2, 1.0);
    phi *= 0.95 / phi.sup_norm();
    const auto fd = finite_distance_check(phi);
    const double s = phi.sup_norm();
    CHECK(fd.ok);
    // |det(I - phi phibar)| >= (1 - s^2)^n
    CHECK(fd.margin >= (1.0 - s * s) * (1.0 - s * s) - 1e-12);
  }
}

TEST_CASE("scaling a map to a target sup norm") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(8);
  const auto spec = scale_to_sup_norm(g, random_separable_map(g, rng, 1, 1.0), 0.3);
  CHECK(std::abs(beltrami_from_map(TorusMap(g, spec)).sup_norm() - 0.3) < 1e-5);
  CHECK_THROWS_AS(scale_to_sup_norm(g, spec, 1.5), PreconditionError);
}

TEST_CASE("band-limited integrable generators") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(9);
  CHECK(integrability_residual(separable_beltrami(g, rng, 3, 0.5)) <= 1e-14);
  CHECK(integrability_residual(triangular_beltrami(g, rng, 3, 0.5)) <= 1e-14);
  CHECK(integrability_residual(random_beltrami(g, rng, 2, 0.5)) > 1e-3);
}
