#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavedyn/decompose.hpp"
#include "wavedyn/eigen.hpp"
#include "wavedyn/integrate.hpp"
#include "wavedyn/random.hpp"

using namespace wavedyn;
using Catch::Approx;

namespace {

StateA smooth_state_a(const Mesh& m, double eps) {
  const double pi = 3.14159265358979323846;
  Field u0 = sample(m, [&](double x) { return std::cos(pi * x) + 0.5; });
  Field u1 = sample(m, [&](double x) { return 0.5 * std::sin(pi * x); });
  return initial_data_a(u0, u1, {1.0, -0.5}, {0.3, 0.6}, eps, m);
}

}  // namespace

TEST_CASE("initial data map: classical case and scaling") {
  Mesh m = build_mesh(16, 1.0);
  Field u0(m.n_nodes, 2.0), u1 = zero_field(m);
  BoundaryField d0{0.4, -0.2}, d1{0.7, 0.9};

  StateA full = initial_data_a(u0, u1, d0, d1, 1.0, m);
  REQUIRE(full.gamma[0] == Approx(d1[0]).margin(1e-15));
  REQUIRE(full.gamma[1] == Approx(d1[1]).margin(1e-15));
  REQUIRE(full.delta[0] == Approx(d0[0]).margin(1e-15));

  StateA half = initial_data_a(u0, u1, d0, {0.0, 0.0}, 0.5, m);
  REQUIRE(half.gamma[0] == Approx(-1.0).margin(1e-15));
  REQUIRE(half.gamma[1] == Approx(-1.0).margin(1e-15));

  // Vanishing-inertia limit recovers the canonical extension -trace(u0).
  StateA tiny = initial_data_a(u0, u1, d0, d1, 1e-12, m);
  REQUIRE(tiny.gamma[0] == Approx(-2.0).margin(1e-11));
  REQUIRE(tiny.gamma[1] == Approx(-2.0).margin(1e-11));

  REQUIRE_THROWS_AS(initial_data_a(u0, u1, d0, d1, 0.0, m), Error);
}

TEST_CASE("initial data satisfies the boundary compatibility identity") {
  Mesh m = build_mesh(20, 1.0);
  Rng rng(3);
  for (double eps : {1.0, 0.3, 0.05}) {
    Field u0 = random_field(rng, m), u1 = random_field(rng, m);
    BoundaryField d0{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    BoundaryField d1{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    StateA z = initial_data_a(u0, u1, d0, d1, eps, m);
    BoundaryField tu = trace(u0, m);
    for (int b = 0; b < 2; ++b) {
      // gamma + trace(u) = eps*(delta_1 + trace(u)): the static boundary
      // law is violated by exactly an O(eps) residual at t = 0.
      REQUIRE(z.gamma[b] + tu[b] ==
              Approx(eps * (d1[b] + tu[b])).margin(1e-14));
    }
  }
}

TEST_CASE("zero state is a fixed point of the step map") {
  Mesh m = build_mesh(24, 1.0);
  StepperR st(m, make_cubic(), SolverOptions{});
  StateR z = st.step(zero_state_r(m), 1e-2);
  for (double x : z.u) REQUIRE(x == Approx(0.0).margin(1e-14));
  for (double x : z.v) REQUIRE(x == Approx(0.0).margin(1e-14));
}

TEST_CASE("single-mode run matches the damped oscillator solution") {
  Mesh m = build_mesh(64, 1.0);
  EigenResult modes = eigenpairs(m, 1);
  StateR z0{modes.vectors[0], zero_field(m)};
  SimulateOptions so;
  so.horizon = 1.0;
  so.dt = 1e-3;
  so.stride = 1000;
  TrajectoryRecord rec = simulate(z0, m, make_zero_nonlinearity(), so);
  const StateR& zT = rec.states_r.back();
  double amp = 0.0;
  for (int i = 0; i < m.n_nodes; ++i)
    amp += m.weight[i] * zT.u[i] * modes.vectors[0][i];
  double exact = damped_mode_amplitude(modes.values[0], 1.0, 0.0, 1.0);
  REQUIRE(std::abs(amp - exact) / std::abs(exact) <= 1e-4);
}

TEST_CASE("damped mode amplitude solves the scalar equation") {
  // a'' + a' + (lambda+1) a = 0 checked by finite differences.
  double lambda = 1.7, a0 = 0.8, a1 = -0.3, h = 1e-5;
  for (double t : {0.5, 1.0, 2.0}) {
    double am = damped_mode_amplitude(lambda, a0, a1, t - h);
    double ac = damped_mode_amplitude(lambda, a0, a1, t);
    double ap = damped_mode_amplitude(lambda, a0, a1, t + h);
    double dd = (ap - 2 * ac + am) / (h * h);
    double d1 = (ap - am) / (2 * h);
    REQUIRE(std::abs(dd + d1 + (lambda + 1.0) * ac) <= 1e-5);
  }
  REQUIRE(damped_mode_amplitude(lambda, a0, a1, 0.0) == Approx(a0));
}

TEST_CASE("energy balance residual is bounded by the solver tolerance") {
  Mesh m = build_mesh(48, 1.0);
  StateA z0 = smooth_state_a(m, 0.5);
  for (double tol : {1e-8, 1e-10, 1e-12}) {
    SimulateOptions so;
    so.horizon = 0.2;
    so.dt = 1e-3;
    so.stride = 50;
    so.keep_states = false;
    so.solver.tolerance = tol;
    TrajectoryRecord rec =
        simulate(z0, 0.5, m, make_cubic(), make_bounded_sine(0.3), so);
    REQUIRE(rec.max_balance_residual() <= 10.0 * tol);
  }
}

TEST_CASE("energy is nonincreasing along trajectories") {
  Mesh m = build_mesh(64, 1.0);
  EigenResult modes = eigenpairs(m, 8);
  Rng rng(13);
  StateR z0 = random_state_r(modes, 2.0, rng, m);
  SimulateOptions so;
  so.horizon = 10.0;
  so.dt = 1e-3;
  so.stride = 100;
  so.keep_states = false;
  TrajectoryRecord rec = simulate(z0, m, make_cubic(), so);
  for (size_t i = 1; i < rec.energies.size(); ++i)
    REQUIRE(rec.energies[i].total <= rec.energies[i - 1].total + 1e-12);
  for (double d : rec.dissipation) REQUIRE(d >= 0.0);
  for (size_t i = 1; i < rec.times.size(); ++i)
    REQUIRE(rec.times[i] > rec.times[i - 1]);
}

TEST_CASE("simulation rejects a horizon that is not a step multiple") {
  Mesh m = build_mesh(8, 1.0);
  SimulateOptions so;
  so.horizon = 1.0;
  so.dt = 3e-4;
  REQUIRE_THROWS_AS(simulate(zero_state_r(m), m, make_cubic(), so), Error);
}

TEST_CASE("non-convergent step reports an explicit failure") {
  Mesh m = build_mesh(16, 1.0);
  SolverOptions opts;
  opts.tolerance = 1e-13;
  opts.max_iterations = 1;
  StepperR st(m, make_cubic(), opts);
  StateR big{Field(m.n_nodes, 10.0), Field(m.n_nodes, -10.0)};
  bool failed = false;
  try {
    st.step(big, 50.0);
  } catch (const StepFailure& e) {
    failed = true;
    REQUIRE(e.residual > opts.tolerance);
    REQUIRE(e.iterations >= 1);
  }
  REQUIRE(failed);
}

TEST_CASE("sampling stride controls the record length") {
  Mesh m = build_mesh(8, 1.0);
  SimulateOptions so;
  so.horizon = 1.0;
  so.dt = 1e-2;
  so.stride = 10;
  TrajectoryRecord rec = simulate(zero_state_r(m), m, make_cubic(), so);
  REQUIRE(rec.times.size() == 11);  // t = 0, 0.1, ..., 1.0
  REQUIRE(rec.times.front() == Approx(0.0));
  REQUIRE(rec.times.back() == Approx(1.0));
  REQUIRE(rec.balance_residuals.size() == 100);  // one per step
}

TEST_CASE("decomposition of zero data stays zero") {
  Mesh m = build_mesh(24, 1.0);
  SimulateOptions so;
  so.horizon = 0.5;
  so.dt = 1e-2;
  so.stride = 10;
  DecompositionRecord rec =
      decomposition_run(zero_state_a(m), 0.5, 1.0, m, make_cubic(), so);
  for (double x : rec.xi_norms) REQUIRE(x <= 1e-12);
  for (double x : rec.chi_norms) REQUIRE(x <= 1e-12);
  REQUIRE(rec.max_residual <= 1e-11);
}

TEST_CASE("uncoupled decomposition leaves a decaying difference part") {
  Mesh m = build_mesh(32, 1.0);
  StateA z0 = smooth_state_a(m, 1.0);
  SimulateOptions so;
  so.horizon = 10.0;
  so.dt = 1e-2;
  so.stride = 10;
  DecompositionRecord rec =
      decomposition_run(z0, 1.0, 0.0, m, make_zero_nonlinearity(), so);
  // With f = 0 and beta = 0 the chi system receives no forcing at all.
  for (double x : rec.chi_norms) REQUIRE(x <= 1e-12);
  REQUIRE(rec.xi_norms.back() < 0.5 * rec.xi_norms.front());
  REQUIRE(rec.max_residual <= 1e-9);
}

TEST_CASE("decomposition rejects an insufficient linear shift") {
  Mesh m = build_mesh(16, 1.0);
  SimulateOptions so;
  so.horizon = 0.1;
  so.dt = 1e-2;
  REQUIRE_THROWS_AS(
      decomposition_run(zero_state_a(m), 0.5, 0.4, m,
                        make_cubic_minus_linear(0.5), so),
      Error);
}

TEST_CASE("recorded energies match the model energy of stored states") {
  Mesh m = build_mesh(24, 1.0);
  StateA z0 = smooth_state_a(m, 0.25);
  SimulateOptions so;
  so.horizon = 0.2;
  so.dt = 1e-2;
  so.stride = 5;
  Nonlinearity nl = make_cubic();
  BoundaryNonlinearity bnl = make_zero_boundary();
  TrajectoryRecord rec = simulate(z0, 0.25, m, nl, bnl, so);
  REQUIRE(rec.states_a.size() == rec.times.size());
  for (size_t i = 0; i < rec.times.size(); ++i) {
    EnergyBreakdown e = energy(rec.states_a[i], 0.25, m, nl, bnl);
    REQUIRE(rec.energies[i].total == Approx(e.total).margin(1e-12));
    REQUIRE(rec.phase_norms[i] ==
            Approx(phase_norm(rec.states_a[i], 0.25, m)).margin(1e-12));
  }
}
