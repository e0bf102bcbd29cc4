#include <doctest.h>

#include <cmath>
#include <random>

#include "hodge/deformation.hpp"
#include "hodge/error.hpp"
#include "hodge/forms.hpp"
#include "oracles.hpp"

using namespace hodge;
using oracle::cplx;

namespace {

std::vector<cplx> random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> nd;
  std::vector<cplx> m(static_cast<std::size_t>(n * n));
  for (auto& v : m) v = scale * cplx(nd(rng), nd(rng));
  return m;
}

double max_diff(const FormField& a, const FormField& b) {
  a.check_same_shape(b);
  const auto pa = a.physical();
  const auto pb = b.physical();
  double m = 0.0;
  for (std::size_t i = 0; i < a.component_count(); ++i) {
    m = std::max(m, oracle::max_diff(pa.component(i).values(), pb.component(i).values()));
  }
  return m;
}

// random trig polynomial on n complex dims with |k_a| <= band
oracle::TrigPoly random_poly(std::mt19937_64& rng, int n, int band, int waves) {
  std::uniform_int_distribution<int> freq(-band, band);
  std::normal_distribution<double> nd;
  oracle::TrigPoly p;
  for (int w = 0; w < waves; ++w) {
    std::array<int, 4> k{};
    for (int a = 0; a < 2 * n; ++a) k[static_cast<std::size_t>(a)] = freq(rng);
    p.waves.push_back({k, cplx(nd(rng), nd(rng))});
  }
  return p;
}

}  // namespace

TEST_CASE("component counts and sign table") {
  CHECK(basis::masks(2, {1, 1}).size() == 4);
  CHECK(basis::masks(2, {2, 1}).size() == 2);
  CHECK(basis::masks(1, {1, 1}).size() == 1);
  CHECK(basis::masks(2, {3, 0}).empty());
  for (unsigned a = 0; a < 16; ++a) {
    for (unsigned b = 0; b < 16; ++b) {
      std::vector<int> idx;
      for (int i = 0; i < 4; ++i) {
        if (a & (1u << i)) idx.push_back(i);
      }
      for (int i = 0; i < 4; ++i) {
        if (b & (1u << i)) idx.push_back(i);
      }
      CHECK(basis::wedge_sign(a, b) == oracle::sort_sign(idx));
    }
  }
}

TEST_CASE("shape errors") {
  const TorusGrid g1(1, 8);
  const TorusGrid g2(2, 8);
  FormField a(g1, {1, 0});
  FormField b(g1, {0, 1});
  CHECK_THROWS_AS(a += b, ShapeError);
  CHECK_THROWS_AS(a += FormField(g2, {1, 0}), ShapeError);
  CHECK_THROWS_AS(a.at(0b10), ShapeError);
}

TEST_CASE("n=1 contraction of dz") {
  const TorusGrid g(1, 16);
  std::mt19937_64 rng(1);
  const auto phi = random_beltrami(g, rng, 3, 0.3);
  const auto out = contract(phi, volume_form(g));
  CHECK(out.bidegree() == Bidegree{0, 1});
  CHECK(oracle::max_diff(out.at(0b10).values(), phi.coefficient(0, 0).values()) < 1e-15);
}

TEST_CASE("contraction of a (0,q)-form is the zero form") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(2);
  const auto phi = random_beltrami(g, rng, 2, 0.3);
  const auto out = contract(phi, random_form(g, {0, 1}, rng, 2));
  CHECK(out.structurally_zero());
  CHECK(l2_norm(out) == 0.0);
}

TEST_CASE("n=2 contraction of dz1^dz2 matches the local formula") {
  // phi _| (f dZ) = sum (-1)^{n+i} f phi^i_jbar dz^1..^dz^i..^dz^n ^ dzbar^j
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(3);
  const auto m = random_matrix(rng, 2, 0.4);
  const auto phi = constant_beltrami(g, m);
  const auto out = contract(phi, volume_form(g));
  for (int i = 0; i < 2; ++i) {
    const unsigned rest = i == 0 ? 0b0010u : 0b0001u;
    const double sign = (2 + i + 1) % 2 == 0 ? 1.0 : -1.0;
    for (int j = 0; j < 2; ++j) {
      const cplx expect = sign * m[static_cast<std::size_t>(i * 2 + j)];
      const auto& c = out.at(rest | (1u << (2 + j)));
      CHECK(std::abs(c[17] - expect) < 1e-15);
    }
  }
}

TEST_CASE("wedge") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(4);
  const auto a = random_form(g, {0, 1}, rng, 2);
  const auto b = random_form(g, {1, 0}, rng, 2);
  auto ab = wedge(a, b);
  ab += wedge(b, a);
  CHECK(sup_norm(ab) < 1e-14);

  const std::array<cplx, 1> one{1.0};
  const auto unit = constant_form(g, {0, 0}, one);
  CHECK(max_diff(wedge(a, unit), a) == 0.0);

  const TorusGrid g1(1, 8);
  const std::array<cplx, 1> c{1.0};
  const auto dzbar = constant_form(g1, {0, 1}, c);
  CHECK(wedge(dzbar, wedge(dzbar, volume_form(g1))).structurally_zero());
  CHECK(wedge(dzbar, dzbar).structurally_zero());

  // (1,1) ^ (1,1) on n=2 against the exterior-algebra oracle at one point
  const auto s = random_form(g, {1, 1}, rng, 2);
  const auto t = random_form(g, {1, 1}, rng, 2);
  const auto st = wedge(s, t);
  const std::size_t x = 123;
  oracle::Multivector ms, mt;
  for (unsigned mask : s.masks()) {
    std::vector<int> idx;
    for (int i = 0; i < 4; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    ms[idx] = s.at(mask)[x];
    mt[idx] = t.at(mask)[x];
  }
  const auto prod = oracle::wedge(ms, mt);
  for (const auto& [idx, v] : prod) CHECK(std::abs(st.at(oracle::to_mask(idx))[x] - v) < 1e-13);
}

TEST_CASE("lie bracket") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(5);
  const auto c1 = constant_beltrami(g, random_matrix(rng, 2, 0.3));
  const auto c2 = constant_beltrami(g, random_matrix(rng, 2, 0.3));
  CHECK(lie_bracket(c1, c2).l2_norm() == 0.0);

  const TorusGrid g1(1, 16);
  const auto p1 = random_beltrami(g1, rng, 3, 0.3);
  const auto q1 = random_beltrami(g1, rng, 3, 0.3);
  CHECK(lie_bracket(p1, q1).l2_norm() == 0.0);
  CHECK(dbar_beltrami(p1).l2_norm() == 0.0);
  CHECK(integrability_residual(p1) == 0.0);
}

TEST_CASE("lie bracket and dbar against symbolic evaluation") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(6);
  // phi^i_jbar and psi^i_jbar as trig polynomials
  std::vector<oracle::TrigPoly> P, Q;
  BeltramiField phi(g), psi(g);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      P.push_back(random_poly(rng, 2, 2, 4));
      Q.push_back(random_poly(rng, 2, 2, 4));
      phi.coefficient(i, j) = P.back().sample(g);
      psi.coefficient(i, j) = Q.back().sample(g);
    }
  }
  auto at = [](const std::vector<oracle::TrigPoly>& v, int i, int j) -> const oracle::TrigPoly& {
    return v[static_cast<std::size_t>(i * 2 + j)];
  };
  const auto br = lie_bracket(phi, psi);
  const auto db = dbar_beltrami(phi);
  double err = 0.0;
  double scale = 0.0;
  double err_db = 0.0;
  for (std::size_t x = 0; x < g.size(); x += 37) {
    const auto idx = g.unflatten(x);
    std::array<double, 4> xs{};
    for (int a = 0; a < 4; ++a) xs[static_cast<std::size_t>(a)] = g.coordinate(idx[static_cast<std::size_t>(a)]);
    const std::span<const double> pt(xs.data(), 4);
    for (int j = 0; j < 2; ++j) {
      // coefficient of dzbar1 ^ dzbar2 in sum_i phi^i ^ d_i psi^j + psi^i ^ d_i phi^j
      cplx v = 0.0;
      for (int i = 0; i < 2; ++i) {
        const cplx a1 = at(P, i, 0)(pt), a2 = at(P, i, 1)(pt);
        const cplx b1 = at(Q, j, 0).dz(i, false)(pt), b2 = at(Q, j, 1).dz(i, false)(pt);
        const cplx c1 = at(Q, i, 0)(pt), c2 = at(Q, i, 1)(pt);
        const cplx d1 = at(P, j, 0).dz(i, false)(pt), d2 = at(P, j, 1).dz(i, false)(pt);
        v += (a1 * b2 - a2 * b1) + (c1 * d2 - c2 * d1);
      }
      const cplx got = br.vector_component(j).at(0b1100)[x];
      err = std::max(err, std::abs(got - v));
      scale = std::max(scale, std::abs(v));
      const cplx dref = at(P, j, 1).dz(0, true)(pt) - at(P, j, 0).dz(1, true)(pt);
      err_db = std::max(err_db, std::abs(db.vector_component(j).at(0b1100)[x] - dref));
    }
  }
  CHECK(err / scale < 1e-12);
  CHECK(err_db < 1e-12);

  // symmetry for valence one
  auto sym = lie_bracket(psi, phi);
  sym -= br;
  CHECK(sym.l2_norm() < 1e-12 * br.l2_norm());
}

TEST_CASE("lie bracket against finite differences") {
  // FD error must decay at 4th order or better; the spectral value is exact for band 1
  std::vector<double> errs;
  for (int N : {16, 32}) {
    const TorusGrid g(2, N);
    std::mt19937_64 rng(8);
    const auto phi = random_beltrami(g, rng, 1, 1.0);
    const auto psi = random_beltrami(g, rng, 1, 1.0);
    const auto br = lie_bracket(phi, psi);
    double err = 0.0;
    for (int j = 0; j < 2; ++j) {
      std::vector<cplx> v(g.size(), 0.0);
      for (int i = 0; i < 2; ++i) {
        const auto db2 = oracle::fd_complex(g, psi.coefficient(j, 1).values(), i, false);
        const auto db1 = oracle::fd_complex(g, psi.coefficient(j, 0).values(), i, false);
        const auto dd2 = oracle::fd_complex(g, phi.coefficient(j, 1).values(), i, false);
        const auto dd1 = oracle::fd_complex(g, phi.coefficient(j, 0).values(), i, false);
        for (std::size_t x = 0; x < g.size(); ++x) {
          v[x] += phi.coefficient(i, 0)[x] * db2[x] - phi.coefficient(i, 1)[x] * db1[x] +
                  psi.coefficient(i, 0)[x] * dd2[x] - psi.coefficient(i, 1)[x] * dd1[x];
        }
      }
      err = std::max(err, oracle::max_diff(br.vector_component(j).at(0b1100).values(), v));
    }
    errs.push_back(err);
  }
  MESSAGE("observed order " << oracle::observed_order(errs[0], errs[1]));
  CHECK(oracle::observed_order(errs[0], errs[1]) >= 4.0);
}

TEST_CASE("exponential of contraction") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(9);
  const auto sigma = random_form(g, {2, 0}, rng, 2);
  const BeltramiField zero(g);
  const auto e0 = exp_contraction(zero, sigma);
  CHECK(max_diff(*e0.part({2, 0}), sigma) == 0.0);
  CHECK(l2_norm(*e0.part({1, 1})) == 0.0);

  const auto phi = random_beltrami(g, rng, 2, 0.3);
  const auto e = exp_contraction(phi, volume_form(g));
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t x = 0; x < g.size(); x += 11) {
    std::vector<cplx> m;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) m.push_back(phi.coefficient(i, j)[x]);
    }
    for (const auto& [idx, v] : oracle::product_form(2, m)) {
      const auto mask = oracle::to_mask(idx);
      const auto deg = basis::bidegree_of(2, mask);
      err = std::max(err, std::abs(e.part(deg)->at(mask)[x] - v));
      scale = std::max(scale, std::abs(v));
    }
  }
  CHECK(err / scale < 1e-12);

  // i_phi^{p+1} sigma = 0
  CHECK(contract(phi, contract(phi, contract(phi, sigma))).structurally_zero());
}

TEST_CASE("contractions commute") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(10);
  const auto phi = random_beltrami(g, rng, 2, 0.5);
  const auto psi = random_beltrami(g, rng, 2, 0.5);
  for (Bidegree d : {Bidegree{2, 0}, Bidegree{2, 1}}) {
    const auto s = random_form(g, d, rng, 2);
    const auto a = contract(phi, contract(psi, s));
    const auto b = contract(psi, contract(phi, s));
    CHECK(l2_norm(a - b) <= 1e-13 * l2_norm(a));
  }
}

TEST_CASE("contraction and wedge are pointwise") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(12);
  const auto phi = random_beltrami(g, rng, 2, 0.5);
  const auto s = random_form(g, {2, 0}, rng, 2);
  auto s2 = s;
  s2.component(0)[100] += 3.0;
  const auto a = contract(phi, s);
  const auto b = contract(phi, s2);
  const auto t = random_form(g, {0, 1}, rng, 2);
  const auto wa = wedge(t, s);
  const auto wb = wedge(t, s2);
  for (std::size_t i = 0; i < a.component_count(); ++i) {
    for (std::size_t x = 0; x < g.size(); ++x) {
      if (x == 100) continue;
      CHECK(a.component(i)[x] == b.component(i)[x]);
    }
  }
  for (std::size_t i = 0; i < wa.component_count(); ++i) {
    for (std::size_t x = 0; x < g.size(); ++x) {
      if (x == 100) continue;
      CHECK(wa.component(i)[x] == wb.component(i)[x]);
    }
  }
}

TEST_CASE("lie derivative parts") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(13);
  const auto phi = random_beltrami(g, rng, 2, 0.5);

  // (0,q): only i_phi d' survives in the (1,0) part
  const auto s0 = random_form(g, {0, 1}, rng, 2);
  const auto parts0 = lie_derivative_parts(phi, s0);
  CHECK(l2_norm(parts0.holomorphic - contract(phi, partial(s0))) < 1e-14);

  // constant data: everything vanishes
  const auto c = constant_beltrami(g, random_matrix(rng, 2, 0.3));
  const std::array<cplx, 2> coeff{1.0, cplx(0.0, 2.0)};
  const auto sc = constant_form(g, {1, 0}, coeff);
  const auto pc = lie_derivative_parts(c, sc);
  CHECK(l2_norm(pc.holomorphic) < 1e-14);
  CHECK(l2_norm(pc.antiholomorphic) < 1e-14);

  // sum of parts equals -d i_phi + i_phi d
  const auto s = random_form(g, {2, 0}, rng, 2);
  const auto p = lie_derivative_parts(phi, s);
  MixedForm sum(p.holomorphic);
  sum.add(p.antiholomorphic);
  auto ref = contract(phi, exterior_derivative(s));
  ref -= exterior_derivative(contract(phi, s));
  CHECK(l2_norm(sum - ref) < 1e-12 * l2_norm(ref));
}

TEST_CASE("generalized Cartan identities") {
  const TorusGrid g(2, 16);
  const BeltramiField zero(g);
  std::mt19937_64 rng0(0);
  CHECK(cartan_residual(zero, zero, random_form(g, {2, 0}, rng0, 2)) == 0.0);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed);
    const auto phi = random_beltrami(g, rng, 2, 0.5);
    const auto psi = random_beltrami(g, rng, 2, 0.5);
    for (Bidegree d : {Bidegree{2, 0}, Bidegree{1, 1}, Bidegree{2, 1}}) {
      const auto s = random_form(g, d, rng, 2);
      CHECK(cartan_residual(phi, psi, s) <= 1e-8);
      CHECK(cartan_special_residual(phi, s) <= 1e-8);
    }
  }
}

TEST_CASE("conjugation formula") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(21);
  const auto s = random_form(g, {2, 0}, rng, 1);
  const BeltramiField zero(g);
  CHECK(conjugation_residual(zero, s).general_norm == 0.0);

  const auto phi = random_beltrami(g, rng, 1, 0.5);
  const auto r = conjugation_residual(phi, s);
  CHECK(r.general_norm <= 1e-8);
  // non-integrable: the integrable-form residual must not vanish
  CHECK(r.integrable_norm > 1e-3);

  const auto tri = triangular_beltrami(g, rng, 1, 0.5);
  CHECK(integrability_residual(tri) < 1e-13);
  const auto ri = conjugation_residual(tri, s);
  CHECK(ri.general_norm <= 1e-8);
  CHECK(ri.integrable_norm <= 1e-8);
  CHECK(std::abs(ri.general_norm - ri.integrable_norm) <= 1e-8);
}

TEST_CASE("sup norm is the largest singular value") {
  const TorusGrid g(2, 8);
  std::mt19937_64 rng(30);
  const auto phi = random_beltrami(g, rng, 2, 0.4);
  double ref = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    std::vector<cplx> m;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) m.push_back(phi.coefficient(i, j)[x]);
    }
    ref = std::max(ref, oracle::largest_singular_value(2, m));
  }
  CHECK(std::abs(phi.sup_norm() - ref) < 1e-13 * ref);
  CHECK(BeltramiField(g).sup_norm() == 0.0);
  auto scaled = phi;
  scaled *= cplx(0.0, -2.5);
  CHECK(std::abs(scaled.sup_norm() - 2.5 * phi.sup_norm()) < 1e-13);
}
