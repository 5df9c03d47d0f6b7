#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavedyn/dynamics.hpp"
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

// Reference semidistance: plain nested loops, no early exit.
template <class State, class Dist>
double brute_force_semidist(const std::vector<State>& a,
                            const std::vector<State>& b, const Dist& dist) {
  double worst = 0.0;
  for (const State& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const State& q : b) best = std::min(best, dist(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("projection inverts the lift exactly") {
  Mesh m = build_mesh(20, 1.0);
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    StateR phi{random_field(rng, m), random_field(rng, m)};
    StateA z = lift(phi, m);
    REQUIRE(z.delta[0] == 0.0);
    REQUIRE(z.delta[1] == 0.0);
    StateR back = project(z);
    for (int i = 0; i < m.n_nodes; ++i) {
      REQUIRE(back.u[i] == phi.u[i]);
      REQUIRE(back.v[i] == phi.v[i]);
    }
  }
}

TEST_CASE("lift of a constant state") {
  Mesh m = build_mesh(10, 1.0);
  StateA z = lift(StateR{Field(m.n_nodes, 3.0), zero_field(m)}, m);
  REQUIRE(z.gamma[0] == Approx(-3.0));
  REQUIRE(z.gamma[1] == Approx(-3.0));
  REQUIRE(z.delta[0] == 0.0);
  REQUIRE(z.delta[1] == 0.0);
}

TEST_CASE("zero data gives an identically zero gap curve") {
  Mesh m = build_mesh(16, 1.0);
  SimulateOptions so;
  so.horizon = 0.2;
  so.dt = 1e-2;
  so.stride = 5;
  GapCurve g = trajectory_gap(zero_state_a(m), 0.5, m, make_cubic(),
                              make_zero_boundary(), so);
  for (double x : g.lifted) REQUIRE(x <= 1e-13);
  for (double x : g.projected) REQUIRE(x <= 1e-13);
  REQUIRE(g.sup_lifted <= 1e-13);
}

TEST_CASE("gap at time zero matches its closed form") {
  Mesh m = build_mesh(24, 1.0);
  Rng rng(9);
  SimulateOptions so;
  so.horizon = 0.05;
  so.dt = 1e-2;
  so.stride = 1;
  for (double eps : {1.0, 0.1}) {
    Field u0 = random_field(rng, m), u1 = random_field(rng, m);
    BoundaryField d0{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    BoundaryField d1{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    StateA z0 = initial_data_a(u0, u1, d0, d1, eps, m);
    double closed = initial_lift_gap(u0, d0, d1, eps, m);
    REQUIRE(lifted_gap(z0, StateR{u0, u1}, eps, m) ==
            Approx(closed).margin(1e-13));
    GapCurve g =
        trajectory_gap(z0, eps, m, make_cubic(), make_zero_boundary(), so);
    REQUIRE(g.lifted.front() == Approx(closed).margin(1e-13));
  }
}

TEST_CASE("two-point scaling of the trajectory gap") {
  Mesh m = build_mesh(48, 1.0);
  SimulateOptions so;
  so.horizon = 1.0;
  so.dt = 1e-3;
  so.stride = 20;
  Nonlinearity nl = make_cubic();
  BoundaryNonlinearity bnl = make_zero_boundary();
  auto sup_gap = [&](double eps) {
    return trajectory_gap(smooth_state_a(m, eps), eps, m, nl, bnl, so)
        .sup_lifted;
  };
  double ratio = sup_gap(1e-2) / sup_gap(1e-4);
  REQUIRE(ratio >= 5.0);   // expected ~ sqrt(1e-2/1e-4) = 10
  REQUIRE(ratio <= 20.0);  // within a factor of two
}

TEST_CASE("power-law fit recovers synthetic exponents") {
  std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> root_gaps, linear_gaps;
  for (double e : eps) {
    root_gaps.push_back(2.5 * std::sqrt(e));
    linear_gaps.push_back(0.7 * e);
  }
  PowerFit fr = fit_power_law(eps, root_gaps);
  REQUIRE(fr.rate == Approx(0.5).margin(1e-12));
  REQUIRE(fr.prefactor == Approx(2.5).margin(1e-12));
  REQUIRE(fr.rms_log_residual <= 1e-12);
  PowerFit fl = fit_power_law(eps, linear_gaps);
  REQUIRE(fl.rate == Approx(1.0).margin(1e-12));
}

TEST_CASE("power-law fit drops zero gaps and requires three points") {
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> gaps{0.1, 0.0, 0.0, 1e-4};
  REQUIRE_THROWS_AS(fit_power_law(eps, gaps), Error);
  std::vector<double> ok{0.1, 0.01, 0.0, 1e-4};
  PowerFit f = fit_power_law(eps, ok);  // one dropped point still fits
  REQUIRE(f.count == 3);
}

TEST_CASE("monotone trend detector allows the configured band") {
  REQUIRE(monotone_within_band({{1e-3, 1.0}, {1e-2, 2.0}, {1e-1, 3.0}}, 0.1));
  // A 5 percent dip is inside the band.
  REQUIRE(monotone_within_band({{1e-3, 1.0}, {1e-2, 0.96}, {1e-1, 3.0}}, 0.1));
  REQUIRE_FALSE(
      monotone_within_band({{1e-3, 1.0}, {1e-2, 0.5}, {1e-1, 3.0}}, 0.1));
}

TEST_CASE("contraction of the linear problem has nonpositive fitted rate") {
  Mesh m = build_mesh(32, 1.0);
  EigenResult modes = eigenpairs(m, 1);
  SimulateOptions so;
  so.horizon = 3.0;
  so.dt = 1e-2;
  so.stride = 5;
  std::vector<std::pair<StateR, StateR>> pairs;
  StateR a{modes.vectors[0], zero_field(m)};
  StateR b = a;
  for (double& x : b.u) x *= 1.5;
  pairs.emplace_back(a, b);
  LipschitzResult lr =
      lipschitz_fit(pairs, m, make_zero_nonlinearity(), so);
  REQUIRE(lr.nu_hat <= 0.0);
  REQUIRE(lr.max_pointwise_excess <= 1e-6);
}

TEST_CASE("identical initial pairs are rejected") {
  Mesh m = build_mesh(16, 1.0);
  SimulateOptions so;
  so.horizon = 0.1;
  so.dt = 1e-2;
  StateR a{Field(m.n_nodes, 1.0), zero_field(m)};
  std::vector<std::pair<StateR, StateR>> pairs{{a, a}};
  REQUIRE_THROWS_AS(lipschitz_fit(pairs, m, make_cubic(), so), Error);
}

TEST_CASE("pointwise bound holds for the nonlinear flow by construction") {
  Mesh m = build_mesh(32, 1.0);
  EigenResult modes = eigenpairs(m, 6);
  Rng rng(41);
  SimulateOptions so;
  so.horizon = 2.0;
  so.dt = 1e-2;
  so.stride = 5;
  std::vector<std::pair<StateA, StateA>> pairs;
  for (int p = 0; p < 3; ++p) {
    StateA base = random_state_a(modes, 1.0, 0.5, rng, m);
    StateA bump = random_state_a(modes, 0.1, 0.5, rng, m);
    StateA partner = base;
    for (int i = 0; i < m.n_nodes; ++i) {
      partner.u[i] += bump.u[i];
      partner.v[i] += bump.v[i];
    }
    for (int b = 0; b < 2; ++b) {
      partner.delta[b] += bump.delta[b];
      partner.gamma[b] += bump.gamma[b];
    }
    pairs.emplace_back(base, partner);
  }
  LipschitzResult lr = lipschitz_fit(pairs, 0.5, m, make_cubic(),
                                     make_zero_boundary(), so);
  REQUIRE(lr.samples > 0);
  REQUIRE(lr.max_pointwise_excess <= 1e-6);
}

TEST_CASE("closed-form absorbing parameters at worked points") {
  AbsorbingSpec r1 = absorbing_spec_r(1.0, 1.0, 0.25, 0.1, 0.0, 0.1, 1.0);
  REQUIRE(r1.radius_sq == Approx(2.0).margin(1e-15));

  AbsorbingSpec r2 = absorbing_spec_r(1.0, 1.0, 0.25, 1.0, 0.0, 1.0, 1.0);
  REQUIRE(r2.entry_time == Approx(2.0).margin(1e-15));

  AbsorbingSpec a1 =
      absorbing_spec_a_matched(1.0, 1.0, 0.1, 0.5, 0.0, 0.0, 1.0);
  REQUIRE(a1.radius_sq == Approx(2.0).margin(1e-15));
  // Entry time divides by kappa_f + eps*kappa_g = 0: flagged undefined.
  REQUIRE_FALSE(a1.entry_time_defined);

  AbsorbingSpec a2 =
      absorbing_spec_a_matched(1.0, 1.0, 0.1, 0.5, 0.3, 0.2, 1.0);
  REQUIRE(a2.entry_time_defined);
  REQUIRE(a2.entry_time > 0.0);
}

TEST_CASE("invariance scan on synthetic norm series") {
  InvarianceReport all_in = invariance_check({0, 1, 2}, {0.5, 0.4, 0.3}, 1.0);
  REQUIRE(all_in.entered);
  REQUIRE(all_in.entry_index == 0);
  REQUIRE(all_in.entry_time == Approx(0.0));
  REQUIRE(all_in.violations == 0);

  InvarianceReport rep =
      invariance_check({0, 1, 2, 3, 4}, {3, 2, 1, 1.5, 0.9}, 1.0);
  REQUIRE(rep.entered);
  REQUIRE(rep.entry_index == 2);
  REQUIRE(rep.violations == 1);

  InvarianceReport never = invariance_check({0, 1}, {5.0, 4.0}, 1.0);
  REQUIRE_FALSE(never.entered);
}

TEST_CASE("entry-time and composition formulas are exact") {
  REQUIRE(entry_time_bound(1.0, 3.0, 2.0) == Approx(2.0).margin(1e-15));
  auto [c, a] = transitivity_compose(2, 1, 3, 2, 4, 3);
  REQUIRE(c == Approx(10.0).margin(1e-15));
  REQUIRE(a == Approx(1.0).margin(1e-15));

  Rng rng(55);
  for (int rep = 0; rep < 100; ++rep) {
    double k = rng.uniform(0.1, 5.0), a1 = rng.uniform(0.1, 5.0),
           a2 = rng.uniform(0.1, 5.0);
    auto [cc, aa] = transitivity_compose(rng.uniform(0.1, 5.0), k,
                                         rng.uniform(0.1, 5.0), a1,
                                         rng.uniform(0.1, 5.0), a2);
    REQUIRE(aa < std::min(a1, a2));
    REQUIRE(cc > 0.0);
  }
}

TEST_CASE("exponential fit recovers a synthetic decay") {
  std::vector<double> t, d;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.05 * i);
    d.push_back(5.0 * std::exp(-0.3 * 0.05 * i));
  }
  ExpFit fit = exp_attraction_fit(t, d, 1.0);
  REQUIRE(fit.prefactor == Approx(5.0).margin(1e-9));
  REQUIRE(fit.omega == Approx(0.3).margin(1e-9));
  REQUIRE(fit.rms_log_residual <= 1e-9);
}

TEST_CASE("linear dynamics collapse the long-time cloud to the origin") {
  Mesh m = build_mesh(32, 1.0);
  EigenResult modes = eigenpairs(m, 4);
  Rng rng(61);
  std::vector<StateR> ics{random_state_r(modes, 1.0, rng, m),
                          random_state_r(modes, 2.0, rng, m)};
  SimulateOptions so;
  so.horizon = 45.0;
  so.dt = 5e-3;
  so.stride = 200;
  CloudR cloud = omega_cloud(ics, m, make_zero_nonlinearity(), 40.0, so);
  REQUIRE_FALSE(cloud.points.empty());
  for (const StateR& p : cloud.points)
    REQUIRE(phase_norm(p, m) <= 1e-6);
}

TEST_CASE("cloud size matches the sampling arithmetic") {
  Mesh m = build_mesh(8, 1.0);
  std::vector<StateR> ics{zero_state_r(m)};
  SimulateOptions so;
  so.horizon = 1.0;
  so.dt = 1e-2;
  so.stride = 1;
  CloudR cloud = omega_cloud(ics, m, make_cubic(), 0.5, so);
  double expected = (so.horizon - 0.5) / so.dt;  // plus-minus one sample
  REQUIRE(std::abs(static_cast<double>(cloud.points.size()) - expected) <=
          1.0 + 1e-9);
}

TEST_CASE("softened cubic still collapses the attractor cloud to zero") {
  // The stationary equation -u'' + u + f(u) = 0 with f(s) = s^3 - 0.5 s
  // reduces to u (u^2 + 0.5) = 0 at equilibria, so 0 is the only one: the
  // cloud must collapse even though f itself has three zeros.
  Mesh m = build_mesh(32, 1.0);
  EigenResult modes = eigenpairs(m, 4);
  Rng rng(67);
  std::vector<StateR> ics{random_state_r(modes, 1.5, rng, m),
                          random_state_r(modes, 3.0, rng, m)};
  SimulateOptions so;
  so.horizon = 45.0;
  so.dt = 5e-3;
  so.stride = 200;
  CloudR cloud =
      omega_cloud(ics, m, make_cubic_minus_linear(0.5), 40.0, so);
  for (const StateR& p : cloud.points)
    REQUIRE(phase_norm(p, m) <= 1e-6);
}

TEST_CASE("semidistance agrees with the exhaustive reference") {
  Mesh m = build_mesh(2, 1.0);
  DistPhaseR dist{&m};
  Rng rng(73);
  auto random_cloud = [&](int count) {
    std::vector<StateR> pts;
    for (int i = 0; i < count; ++i)
      pts.push_back(StateR{random_field(rng, m), random_field(rng, m)});
    return pts;
  };
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<StateR> a = random_cloud(1 + static_cast<int>(rng.raw() % 6));
    std::vector<StateR> b = random_cloud(1 + static_cast<int>(rng.raw() % 6));
    REQUIRE(hausdorff_semidist(a, b, dist) ==
            brute_force_semidist(a, b, dist));
  }
}

TEST_CASE("semidistance asymmetry on a two-point cloud") {
  Mesh m = build_mesh(2, 1.0);
  DistPhaseR dist{&m};
  StateR zero = zero_state_r(m);
  StateR p = zero;
  p.v = Field(m.n_nodes, 1.0);  // unitphase norm: ||v||_{L2} = 1
  REQUIRE(phase_norm(p, m) == Approx(1.0).margin(1e-12));
  std::vector<StateR> a{zero, p}, b{zero};
  REQUIRE(hausdorff_semidist(a, b, dist) == Approx(1.0).margin(1e-12));
  REQUIRE(hausdorff_semidist(b, a, dist) == Approx(0.0).margin(1e-15));
  // Subset gives zero in one direction.
  REQUIRE(hausdorff_semidist(b, a, dist) <= 1e-15);
}

TEST_CASE("covering numbers and the dimension of synthetic clouds") {
  Mesh m = build_mesh(2, 1.0);
  DistPhaseR dist{&m};

  // Single point: degenerate, dimension zero by convention.
  std::vector<StateR> lone{zero_state_r(m)};
  DimensionEstimate d0 = box_counting_dim(lone, {0.5, 0.25, 0.125}, dist);
  REQUIRE(d0.degenerate);
  REQUIRE(d0.dimension == 0.0);

  // Segment: u = s * const profile, s in [0,1].
  std::vector<StateR> segment;
  for (int i = 0; i < 1000; ++i) {
    double s = static_cast<double>(i) / 999.0;
    segment.push_back(StateR{zero_field(m), Field(m.n_nodes, s)});
  }
  std::vector<double> radii{0.2, 0.1, 0.05, 0.025, 0.0125};
  DimensionEstimate d1 = box_counting_dim(segment, radii, dist);
  REQUIRE(d1.dimension == Approx(1.0).margin(0.2));

  // Lattice patch in the (u-constant, v-constant) plane. A constant
  // displacement c carries squared norm 3c^2 (gradient-free H1 + boundary
  // masses) while a constant velocity carries c^2, so the u-coordinate is
  // shrunk by sqrt(3) to make the patch metrically square. Radii stay well
  // above the lattice spacing so the covering count cannot saturate at the
  // point count.
  const double s3 = std::sqrt(3.0);
  std::vector<StateR> lattice;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      lattice.push_back(StateR{Field(m.n_nodes, i / 31.0 / s3),
                               Field(m.n_nodes, j / 31.0)});
    }
  }
  std::vector<double> coarse{0.25, 0.18, 0.125, 0.09, 0.0625};
  DimensionEstimate d2 = box_counting_dim(lattice, coarse, dist);
  REQUIRE(d2.dimension == Approx(2.0).margin(0.3));
}

TEST_CASE("future running supremum envelope") {
  std::vector<double> env = future_sup_envelope({1.0, 3.0, 2.0, 0.5});
  REQUIRE(env == std::vector<double>{3.0, 3.0, 2.0, 0.5});
}
