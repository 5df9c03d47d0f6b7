#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavedyn/energy.hpp"
#include "wavedyn/random.hpp"

using namespace wavedyn;
using Catch::Approx;

namespace {

// Central-difference check that the stored antiderivative differentiates
// back to the function itself.
template <class F, class G>
void check_antiderivative(const F& f, const G& anti) {
  const double h = 1e-5;
  for (double s = -4.0; s <= 4.0; s += 0.37) {
    double fd = (anti(s + h) - anti(s - h)) / (2.0 * h);
    double scale = std::max(1.0, std::abs(f(s)));
    REQUIRE(std::abs(fd - f(s)) / scale <= 1e-6);
  }
}

}  // namespace

TEST_CASE("catalog values: cubic") {
  Nonlinearity nl = make_cubic();
  REQUIRE(nl.f(2.0) == Approx(8.0));
  REQUIRE(nl.antiderivative(2.0) == Approx(4.0));
  REQUIRE(nl.fprime(2.0) == Approx(12.0));
  REQUIRE(nl.mu0 == Approx(1.0));
  REQUIRE(nl.kappa_f == Approx(0.0));
  REQUIRE(nl.ell == Approx(3.0));
  REQUIRE(nl.ell1 == Approx(6.0));
  REQUIRE(nl.ell2 == Approx(0.0));
  check_antiderivative(nl.f, nl.antiderivative);
}

TEST_CASE("catalog values: zero and shifted cubic") {
  Nonlinearity z = make_zero_nonlinearity();
  REQUIRE(z.f(3.0) == 0.0);
  REQUIRE(z.antiderivative(3.0) == 0.0);
  REQUIRE(z.kappa_f == 0.0);
  REQUIRE(z.mu0 == Approx(1.0));

  Nonlinearity cm = make_cubic_minus_linear(0.5);
  REQUIRE(cm.f(2.0) == Approx(8.0 - 1.0));
  REQUIRE(cm.mu0 == Approx(0.5));
  REQUIRE(cm.ell2 == Approx(0.5));
  check_antiderivative(cm.f, cm.antiderivative);
  REQUIRE_THROWS_AS(make_cubic_minus_linear(1.0), Error);
  REQUIRE_THROWS_AS(make_cubic_minus_linear(-0.1), Error);
}

TEST_CASE("catalog values: bounded sine boundary term") {
  BoundaryNonlinearity g = make_bounded_sine(0.5);
  for (double s = -10.0; s <= 10.0; s += 0.1)
    REQUIRE(std::abs(g.gprime(s)) <= 0.5 + 1e-15);
  REQUIRE(g.mu1 == Approx(1.0));
  REQUIRE(g.kappa_g == Approx(0.0));
  check_antiderivative(g.g, g.antiderivative);

  BoundaryNonlinearity z = make_zero_boundary();
  REQUIRE(z.g(1.0) == 0.0);
}

TEST_CASE("catalog lookup by name") {
  REQUIRE(nonlinearity_by_name("cubic").name == "cubic");
  REQUIRE(nonlinearity_by_name("zero").name == "zero");
  REQUIRE(nonlinearity_by_name("cubic_minus_linear", 0.3).mu0 ==
          Approx(0.7));
  REQUIRE_THROWS_AS(nonlinearity_by_name("unknown"), Error);
  REQUIRE(boundary_by_name("bounded_sine", 0.2).name == "bounded_sine");
  REQUIRE_THROWS_AS(boundary_by_name("unknown"), Error);
}

TEST_CASE("growth bound on the derivative") {
  for (const Nonlinearity& nl :
       {make_cubic(), make_cubic_minus_linear(0.5), make_zero_nonlinearity()}) {
    for (double s = -10.0; s <= 10.0; s += 0.05)
      REQUIRE(std::abs(nl.fprime(s)) <= nl.ell * (1.0 + s * s) + 1e-12);
  }
}

TEST_CASE("sign condition on the potential") {
  Mesh m = build_mesh(48, 1.0);
  Rng rng(17);
  for (const Nonlinearity& nl : {make_cubic(), make_cubic_minus_linear(0.5)}) {
    for (int rep = 0; rep < 30; ++rep) {
      Field u = random_field(rng, m, -3.0, 3.0);
      double pot = 2.0 * potential_integral(u, m, nl);
      double h1 = inner(Inner::H1, u, u, m);
      REQUIRE(pot >= -(1.0 - nl.mu0) * h1 - nl.kappa_f - 1e-12);
    }
  }
}

TEST_CASE("energy of constant states has closed form") {
  Mesh m = build_mesh(64, 1.0);
  StateR s{Field(m.n_nodes, 1.0), zero_field(m)};
  EnergyBreakdown e = energy(s, m, make_cubic());
  // |phi|^2 = 0 + 1 + 2 (trace) = 3; potential 2*(1/4) = 1/2.
  REQUIRE(e.quadratic == Approx(3.0).margin(1e-12));
  REQUIRE(e.potential == Approx(0.5).margin(1e-12));
  REQUIRE(e.total == Approx(3.5).margin(1e-12));

  EnergyBreakdown z = energy(zero_state_r(m), m, make_cubic());
  REQUIRE(z.total == Approx(0.0).margin(1e-15));
}

TEST_CASE("boundary-displacement energy has closed form") {
  Mesh m = build_mesh(64, 1.0);
  StateA z = zero_state_a(m);
  z.delta = {1.0, 1.0};
  EnergyBreakdown e = energy(z, 1.0, m, make_zero_nonlinearity(),
                             make_zero_boundary());
  REQUIRE(e.total == Approx(2.0).margin(1e-14));
  REQUIRE(e.boundary_potential == Approx(0.0).margin(1e-15));
}

TEST_CASE("energy parts always sum to the total") {
  Mesh m = build_mesh(32, 1.0);
  Rng rng(71);
  Nonlinearity nl = make_cubic();
  BoundaryNonlinearity bnl = make_bounded_sine(0.4);
  for (int rep = 0; rep < 20; ++rep) {
    StateA z;
    z.u = random_field(rng, m);
    z.v = random_field(rng, m);
    z.delta = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    z.gamma = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    EnergyBreakdown e = energy(z, 0.7, m, nl, bnl);
    REQUIRE(e.total ==
            Approx(e.quadratic + e.potential + e.boundary_potential)
                .margin(1e-13));
  }
}

TEST_CASE("norm relation between the two phase spaces") {
  Mesh m = build_mesh(32, 1.0);
  Rng rng(19);
  for (double eps : {1.0, 0.25, 0.01}) {
    for (int rep = 0; rep < 20; ++rep) {
      StateA z;
      z.u = random_field(rng, m);
      z.v = random_field(rng, m);
      z.delta = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      z.gamma = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      BoundaryField tu = trace(z.u, m);
      double lhs = phase_norm_sq(z, eps, m);
      double rhs = phase_norm_sq(project(z), m) -
                   inner(Inner::L2Gamma, tu, tu, m) +
                   eps * inner(Inner::L2Gamma, z.delta, z.delta, m) +
                   inner(Inner::L2Gamma, z.gamma, z.gamma, m);
      REQUIRE(lhs == Approx(rhs).epsilon(1e-12).margin(1e-12));
    }
  }
}

TEST_CASE("epsilon-weighted norm is monotone in the weight") {
  Mesh m = build_mesh(16, 1.0);
  Rng rng(23);
  StateA z;
  z.u = random_field(rng, m);
  z.v = random_field(rng, m);
  z.delta = {0.6, -1.2};
  z.gamma = {0.1, 0.4};
  double prev = 0.0;
  for (double eps : {0.01, 0.1, 0.5, 1.0}) {
    double n = phase_norm(z, eps, m);
    REQUIRE(n >= prev - 1e-15);
    prev = n;
  }
}

TEST_CASE("phase norms on worked constants") {
  Mesh m = build_mesh(32, 1.0);
  StateR s{Field(m.n_nodes, 1.0), zero_field(m)};
  REQUIRE(phase_norm(s, m) == Approx(std::sqrt(3.0)).margin(1e-12));

  StateA z = zero_state_a(m);
  z.delta = {2.0, 2.0};
  REQUIRE(phase_norm(z, 0.25, m) == Approx(std::sqrt(2.0)).margin(1e-12));
  REQUIRE(phase_norm(zero_state_a(m), 0.5, m) == 0.0);
}

TEST_CASE("Lyapunov functional on worked constants") {
  Mesh m = build_mesh(64, 1.0);
  StateR s{Field(m.n_nodes, 1.0), Field(m.n_nodes, 1.0)};
  // |phi|^2 = 3 + 1; cross term 2<u,v> = 2; potential 1/2.
  REQUIRE(lyapunov_e0(s, m, make_cubic()) == Approx(6.5).margin(1e-12));

  LyapunovBounds zb =
      lyapunov_bounds(zero_state_r(m), m, make_cubic(), 0.25, 1.0);
  REQUIRE(zb.value == Approx(0.0).margin(1e-15));
  REQUIRE(zb.lower <= 0.0);
  REQUIRE(zb.upper >= 0.0);
  REQUIRE(zb.sandwich_ok);
}

TEST_CASE("degenerate cross term reduces the functional to the energy") {
  Mesh m = build_mesh(24, 1.0);
  Nonlinearity flat = make_cubic();
  flat.mu0 = 0.0;  // exercise the formula with the cross term switched off
  Rng rng(29);
  StateR s{random_field(rng, m), random_field(rng, m)};
  double expect = phase_norm_sq(s, m) + 2.0 * potential_integral(s.u, m, flat);
  REQUIRE(lyapunov_e0(s, m, flat) == Approx(expect).margin(1e-13));
}

TEST_CASE("Lyapunov sandwich holds with a calibrated upper constant") {
  Mesh m = build_mesh(48, 1.0);
  Nonlinearity nl = make_cubic();
  EigenResult modes = eigenpairs(m, 6);
  Rng rng(37);
  std::vector<StateR> states;
  for (int rep = 0; rep < 200; ++rep) {
    double nrm = std::pow(10.0, rng.uniform(-3.0, 1.0));
    states.push_back(random_state_r(modes, nrm, rng, m));
  }
  double c2 = calibrate_c2(states, m, nl);
  REQUIRE(c2 > 0.0);
  for (const StateR& s : states) {
    LyapunovBounds b = lyapunov_bounds(s, m, nl, 0.25, c2);
    REQUIRE(b.sandwich_ok);
    REQUIRE(b.lower <= b.value + 1e-12);
    REQUIRE(b.value <= b.upper + 1e-12);
  }
}

TEST_CASE("difference-quotient mean of the potential") {
  Nonlinearity nl = make_cubic();
  // (F(2) - F(1)) / (2 - 1) = (4 - 1/4) / 1.
  REQUIRE(discrete_mean(nl, 1.0, 2.0) == Approx(3.75).margin(1e-14));
  // Closed form degenerates smoothly to the pointwise value.
  REQUIRE(discrete_mean(nl, 1.0, 1.0) == Approx(1.0).margin(1e-14));
  // The generic quotient (no closed form supplied) falls back to the
  // midpoint value when the gap is below resolution.
  REQUIRE(discrete_mean(nl.f, nl.antiderivative, 1.0, 1.0) ==
          Approx(1.0).margin(1e-14));
  BoundaryNonlinearity g = make_bounded_sine(1.0);
  double exact = (g.antiderivative(0.5) - g.antiderivative(-0.25)) / 0.75;
  REQUIRE(discrete_mean(g, -0.25, 0.5) == Approx(exact).margin(1e-13));
  // Closed forms must agree with the quotient away from small gaps.
  REQUIRE(discrete_mean(nl, -0.7, 1.3) ==
          Approx(discrete_mean(nl.f, nl.antiderivative, -0.7, 1.3))
              .margin(1e-12));
  REQUIRE(discrete_mean(g, -0.7, 1.3) ==
          Approx(discrete_mean(g.g, g.antiderivative, -0.7, 1.3))
              .margin(1e-12));
}
