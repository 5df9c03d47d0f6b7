#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include "wavedyn/decompose.hpp"
#include "wavedyn/fit.hpp"
#include "wavedyn/integrate.hpp"
#include "wavedyn/state.hpp"

namespace wavedyn {

// ---------------------------------------------------------------------------
// Trajectory gap between the acoustic flow and the Robin flow
// ---------------------------------------------------------------------------

// Distance history between the acoustic trajectory from z0 and the Robin
// trajectory from its interior projection, measured both ways:
//   lifted:    |z(t) - L(phi(t))|_{H_eps}
//   projected: |Pi(z(t)) - phi(t)|_{H_0}
struct GapCurve {
  std::vector<double> times;
  std::vector<double> lifted;
  std::vector<double> projected;
  double sup_lifted = 0.0;
  double lifted_at_end = 0.0;
  double sup_projected = 0.0;
  double projected_at_end = 0.0;
};

// Build the gap history from two already-computed trajectories sampled on
// the same time grid (states must have been kept).
inline GapCurve gap_from_records(const TrajectoryRecord& acoustic,
                                 const TrajectoryRecord& robin, double eps,
                                 const Mesh& m) {
  ensure(acoustic.acoustic && !robin.acoustic,
         "gap_from_records: need one acoustic and one Robin record");
  ensure(acoustic.states_a.size() == acoustic.times.size() &&
             robin.states_r.size() == robin.times.size(),
         "gap_from_records: records must keep their states");
  ensure(acoustic.times.size() == robin.times.size(),
         "gap_from_records: sample grids differ");
  GapCurve g;
  size_t k = acoustic.times.size();
  g.times = acoustic.times;
  g.lifted.resize(k);
  g.projected.resize(k);
  for (size_t i = 0; i < k; ++i) {
    ensure(acoustic.times[i] == robin.times[i],
           "gap_from_records: sample grids differ");
    g.lifted[i] =
        lifted_gap(acoustic.states_a[i], robin.states_r[i], eps, m);
    g.projected[i] =
        projected_gap(acoustic.states_a[i], robin.states_r[i], m);
    g.sup_lifted = std::max(g.sup_lifted, g.lifted[i]);
    g.sup_projected = std::max(g.sup_projected, g.projected[i]);
  }
  g.lifted_at_end = g.lifted.back();
  g.projected_at_end = g.projected.back();
  return g;
}

inline GapCurve trajectory_gap(const StateA& z0, double eps, const Mesh& m,
                               const Nonlinearity& nl,
                               const BoundaryNonlinearity& bnl,
                               const SimulateOptions& so) {
  SimulateOptions keep = so;
  keep.keep_states = true;
  TrajectoryRecord a = simulate(z0, eps, m, nl, bnl, keep);
  TrajectoryRecord r = simulate(project(z0), m, nl, keep);
  return gap_from_records(a, r, eps, m);
}

// ---------------------------------------------------------------------------
// eps sweep and the square-root scaling law
// ---------------------------------------------------------------------------

struct SweepEntry {
  double eps = 0.0;
  double sup_gap = 0.0;
  double gap_at_end = 0.0;
  double runtime_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> lifted;     // ordered as the input eps list
  std::vector<SweepEntry> projected;
  std::vector<GapCurve> curves;       // full gap histories, same order
  PowerFit fit_lifted;                // sup_gap ~ C * eps^rate
  PowerFit fit_projected;
  bool monotone_lifted = false;       // within the given slack band
  bool monotone_projected = false;
};

// True when the values, reordered by increasing eps, never drop by more
// than the relative band from one entry to the next.
inline bool monotone_within_band(std::vector<std::pair<double, double>> by_eps,
                                 double band) {
  std::sort(by_eps.begin(), by_eps.end());
  for (size_t i = 1; i < by_eps.size(); ++i) {
    if (by_eps[i].second < by_eps[i - 1].second * (1.0 - band)) return false;
  }
  return true;
}

// Sweep the boundary perturbation strength over eps_list with fixed
// classical data (u0, u1, delta0, delta1). The Robin reference trajectory
// is shared across the sweep; acoustic runs are distributed over threads,
// each writing to its own slot so the output does not depend on timing.
inline SweepResult epsilon_sweep(const Field& u0, const Field& u1,
                                 const BoundaryField& delta0,
                                 const BoundaryField& delta1,
                                 const std::vector<double>& eps_list,
                                 const Mesh& m, const Nonlinearity& nl,
                                 const BoundaryNonlinearity& bnl,
                                 const SimulateOptions& so,
                                 int n_threads = 1,
                                 double monotone_band = 0.10) {
  ensure(eps_list.size() >= 3, "epsilon_sweep: need at least three eps values");
  ensure(n_threads >= 1, "epsilon_sweep: thread count must be >= 1");
  SimulateOptions keep = so;
  keep.keep_states = true;

  TrajectoryRecord robin = simulate(StateR{u0, u1}, m, nl, keep);

  size_t k = eps_list.size();
  SweepResult out;
  out.lifted.resize(k);
  out.projected.resize(k);
  out.curves.resize(k);

  parallel_for(k, n_threads, [&](size_t j) {
    double eps = eps_list[j];
    auto tic = std::chrono::steady_clock::now();
    StateA z0 = initial_data_a(u0, u1, delta0, delta1, eps, m);
    TrajectoryRecord a = simulate(z0, eps, m, nl, bnl, keep);
    GapCurve g = gap_from_records(a, robin, eps, m);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - tic)
                      .count();
    out.lifted[j] = {eps, g.sup_lifted, g.lifted_at_end, secs};
    out.projected[j] = {eps, g.sup_projected, g.projected_at_end, secs};
    out.curves[j] = std::move(g);
  });

  std::vector<double> xs(k), yl(k), yp(k);
  std::vector<std::pair<double, double>> pl(k), pp(k);
  for (size_t j = 0; j < k; ++j) {
    xs[j] = eps_list[j];
    yl[j] = out.lifted[j].sup_gap;
    yp[j] = out.projected[j].sup_gap;
    pl[j] = {eps_list[j], yl[j]};
    pp[j] = {eps_list[j], yp[j]};
  }
  out.fit_lifted = fit_power_law(xs, yl);
  out.fit_projected = fit_power_law(xs, yp);
  out.monotone_lifted = monotone_within_band(pl, monotone_band);
  out.monotone_projected = monotone_within_band(pp, monotone_band);
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz dependence on initial data
// ---------------------------------------------------------------------------

// Smallest exponential envelope rate covering all supplied trajectory
// pairs: for each pair the normalized separation r(t) is measured, its
// growth rate is taken as the larger of the LS slope of log r and the
// pointwise max of log r(t)/t, and nu_hat is the max over pairs. By
// construction r(t) <= exp(nu_hat * t) holds at every sample; the worst
// relative excess is reported as a cross-check.
struct LipschitzResult {
  double nu_hat = 0.0;
  std::vector<double> pair_rates;
  double max_pointwise_excess = 0.0;  // max over samples of r/exp(nu_hat t)-1
  int samples = 0;
};

namespace detail {

inline void lipschitz_accumulate(const std::vector<double>& times,
                                 const std::vector<double>& ratios,
                                 LipschitzResult& out) {
  std::vector<double> ts, logs;
  double envelope = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= 0.0) continue;
    if (!(ratios[i] > 0.0)) continue;  // no log information at zero gap
    double lr = std::log(ratios[i]);
    ts.push_back(times[i]);
    logs.push_back(lr);
    envelope = std::max(envelope, lr / times[i]);
  }
  ensure(ts.size() >= 3, "lipschitz_fit: too few usable samples");
  LineFit lf = fit_line(ts, logs);
  double rate = std::max(lf.slope, envelope);
  out.pair_rates.push_back(rate);
  out.samples += static_cast<int>(ts.size());
}

inline void lipschitz_finalize(
    const std::vector<std::vector<double>>& all_times,
    const std::vector<std::vector<double>>& all_ratios, LipschitzResult& out) {
  out.nu_hat = -std::numeric_limits<double>::infinity();
  for (double r : out.pair_rates) out.nu_hat = std::max(out.nu_hat, r);
  double excess = -std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < all_times.size(); ++p) {
    for (size_t i = 0; i < all_times[p].size(); ++i) {
      double bound = std::exp(out.nu_hat * all_times[p][i]);
      excess = std::max(excess, all_ratios[p][i] / bound - 1.0);
    }
  }
  out.max_pointwise_excess = excess;
}

}  // namespace detail

inline LipschitzResult lipschitz_fit(
    const std::vector<std::pair<StateR, StateR>>& pairs, const Mesh& m,
    const Nonlinearity& nl, const SimulateOptions& so) {
  ensure(!pairs.empty(), "lipschitz_fit: no pairs supplied");
  SimulateOptions keep = so;
  keep.keep_states = true;
  LipschitzResult out;
  std::vector<std::vector<double>> all_times, all_ratios;
  for (const auto& pr : pairs) {
    double gap0 = phase_norm(subtract(pr.first, pr.second), m);
    ensure(gap0 > 0.0, "lipschitz_fit: identical initial states in a pair");
    TrajectoryRecord a = simulate(pr.first, m, nl, keep);
    TrajectoryRecord b = simulate(pr.second, m, nl, keep);
    std::vector<double> ratios(a.times.size());
    for (size_t i = 0; i < a.times.size(); ++i) {
      ratios[i] =
          phase_norm(subtract(a.states_r[i], b.states_r[i]), m) / gap0;
    }
    detail::lipschitz_accumulate(a.times, ratios, out);
    all_times.push_back(a.times);
    all_ratios.push_back(std::move(ratios));
  }
  detail::lipschitz_finalize(all_times, all_ratios, out);
  return out;
}

inline LipschitzResult lipschitz_fit(
    const std::vector<std::pair<StateA, StateA>>& pairs, double eps,
    const Mesh& m, const Nonlinearity& nl, const BoundaryNonlinearity& bnl,
    const SimulateOptions& so) {
  ensure(!pairs.empty(), "lipschitz_fit: no pairs supplied");
  SimulateOptions keep = so;
  keep.keep_states = true;
  LipschitzResult out;
  std::vector<std::vector<double>> all_times, all_ratios;
  for (const auto& pr : pairs) {
    double gap0 = phase_norm(subtract(pr.first, pr.second), eps, m);
    ensure(gap0 > 0.0, "lipschitz_fit: identical initial states in a pair");
    TrajectoryRecord a = simulate(pr.first, eps, m, nl, bnl, keep);
    TrajectoryRecord b = simulate(pr.second, eps, m, nl, bnl, keep);
    std::vector<double> ratios(a.times.size());
    for (size_t i = 0; i < a.times.size(); ++i) {
      ratios[i] =
          phase_norm(subtract(a.states_a[i], b.states_a[i]), eps, m) / gap0;
    }
    detail::lipschitz_accumulate(a.times, ratios, out);
    all_times.push_back(a.times);
    all_ratios.push_back(std::move(ratios));
  }
  detail::lipschitz_finalize(all_times, all_ratios, out);
  return out;
}

// ---------------------------------------------------------------------------
// Absorbing-set radii and entry times (closed forms)
// ---------------------------------------------------------------------------

struct AbsorbingSpec {
  double radius_sq = 0.0;
  double radius = 0.0;
  double entry_time = 0.0;
  bool entry_time_defined = true;
};

// Robin problem. For a chosen decay margin iota <= m0 and data norm bound
// R, the phase norm enters the ball of squared radius
//   (C2/C1) * s^{1/2} * (eta*kappa_f + 1 + s^{3/2}),  s = (eta*kappa_f+iota)/m0
// by time (1/iota) * (C2 * R * (1+R^3) + eta*kappa_f) and stays there.
inline AbsorbingSpec absorbing_spec_r(double c1, double c2, double eta,
                                      double m0, double kappa_f, double iota,
                                      double r_start) {
  ensure(c1 > 0.0 && c2 > 0.0, "absorbing_spec_r: C1, C2 must be positive");
  ensure(m0 > 0.0 && iota > 0.0,
         "absorbing_spec_r: m0 and iota must be positive");
  ensure(kappa_f >= 0.0 && eta > 0.0,
         "absorbing_spec_r: eta must be positive, kappa_f nonnegative");
  AbsorbingSpec s;
  double ek = eta * kappa_f;
  double q = (ek + iota) / m0;
  s.radius_sq = (c2 / c1) * std::sqrt(q) * (ek + 1.0 + std::pow(q, 1.5));
  s.radius = std::sqrt(s.radius_sq);
  double r = r_start;
  s.entry_time = (c2 * r * (1.0 + r * r * r) + ek) / iota;
  return s;
}

// Acoustic problem, general decay margin iota:
//   radius_sq = (C2/C1) * s^{1/2} * (kq + 1 + s^{3/2}),
//   s = kq + iota/(m1*eps), kq = kappa_f + eps*kappa_g,
//   entry_time = (1/iota) * (C2 * R * (1+R^3) + kq).
inline AbsorbingSpec absorbing_spec_a(double c1, double c2, double m1,
                                      double eps, double kappa_f,
                                      double kappa_g, double iota,
                                      double r_start) {
  ensure(c1 > 0.0 && c2 > 0.0, "absorbing_spec_a: C1, C2 must be positive");
  ensure(m1 > 0.0 && iota > 0.0,
         "absorbing_spec_a: m1 and iota must be positive");
  ensure(eps > 0.0 && eps <= 1.0, "absorbing_spec_a: eps must lie in (0, 1]");
  ensure(kappa_f >= 0.0 && kappa_g >= 0.0,
         "absorbing_spec_a: kappa_f, kappa_g must be nonnegative");
  AbsorbingSpec s;
  double kq = kappa_f + eps * kappa_g;
  double q = kq + iota / (m1 * eps);
  s.radius_sq = (c2 / c1) * std::sqrt(q) * (kq + 1.0 + std::pow(q, 1.5));
  s.radius = std::sqrt(s.radius_sq);
  double r = r_start;
  s.entry_time = (c2 * r * (1.0 + r * r * r) + kq) / iota;
  return s;
}

// Acoustic problem with the decay margin matched to the boundary
// dissipation scale, iota = m1*eps. The closed forms simplify to
//   radius_sq = (C2/C1) * (kq+1)^{3/2} * (1 + (kq+1)^{1/2}),
//   entry_time = (1/(eps*m1)) * (1 + C2 * R * (1+R^3) / kq),
// the entry time being undefined when kq = 0 (flagged, not thrown).
inline AbsorbingSpec absorbing_spec_a_matched(double c1, double c2, double m1,
                                              double eps, double kappa_f,
                                              double kappa_g, double r_start) {
  ensure(c1 > 0.0 && c2 > 0.0,
         "absorbing_spec_a_matched: C1, C2 must be positive");
  ensure(m1 > 0.0, "absorbing_spec_a_matched: m1 must be positive");
  ensure(eps > 0.0 && eps <= 1.0,
         "absorbing_spec_a_matched: eps must lie in (0, 1]");
  ensure(kappa_f >= 0.0 && kappa_g >= 0.0,
         "absorbing_spec_a_matched: kappa_f, kappa_g must be nonnegative");
  AbsorbingSpec s;
  double kq = kappa_f + eps * kappa_g;
  double k1 = kq + 1.0;
  s.radius_sq = (c2 / c1) * std::pow(k1, 1.5) * (1.0 + std::sqrt(k1));
  s.radius = std::sqrt(s.radius_sq);
  if (kq > 0.0) {
    double r = r_start;
    s.entry_time = (1.0 + c2 * r * (1.0 + r * r * r) / kq) / (eps * m1);
    s.entry_time_defined = true;
  } else {
    s.entry_time = std::numeric_limits<double>::quiet_NaN();
    s.entry_time_defined = false;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Empirical absorbing-ball checks
// ---------------------------------------------------------------------------

// Entry and invariance bookkeeping for one norm history: entry at the
// first sample with norm <= radius, a violation for every later sample
// with norm > radius * (1 + rel_tol). The default tolerance forgives
// rounding-level excursions only.
struct InvarianceReport {
  bool entered = false;
  int entry_index = -1;
  double entry_time = std::numeric_limits<double>::quiet_NaN();
  int violations = 0;
};

inline InvarianceReport invariance_check(const std::vector<double>& times,
                                         const std::vector<double>& norms,
                                         double radius,
                                         double rel_tol = 1e-9) {
  ensure(times.size() == norms.size(), "invariance_check: size mismatch");
  ensure(radius > 0.0, "invariance_check: radius must be positive");
  InvarianceReport rep;
  for (size_t i = 0; i < norms.size(); ++i) {
    if (!rep.entered) {
      if (norms[i] <= radius) {
        rep.entered = true;
        rep.entry_index = static_cast<int>(i);
        rep.entry_time = times[i];
      }
    } else if (norms[i] > radius * (1.0 + rel_tol)) {
      ++rep.violations;
    }
  }
  return rep;
}

// Smallest radius from the measured candidates that every norm history
// enters and never leaves again. Candidates are, per trajectory, the
// values of the future-sup envelope that already work for that
// trajectory; the overall max norm is kept as a fallback, so the scan
// always terminates with a valid radius.
inline double calibrate_absorbing_radius(
    const std::vector<std::vector<double>>& times,
    const std::vector<std::vector<double>>& norms) {
  ensure(times.size() == norms.size() && !norms.empty(),
         "calibrate_absorbing_radius: need matching nonempty histories");
  auto works_for = [&](double r, size_t j) {
    InvarianceReport rep = invariance_check(times[j], norms[j], r);
    return rep.entered && rep.violations == 0;
  };

  std::vector<double> candidates;
  double global_max = 0.0;
  for (size_t j = 0; j < norms.size(); ++j) {
    ensure(!norms[j].empty(), "calibrate_absorbing_radius: empty history");
    std::vector<double> env = future_sup_envelope(norms[j]);
    double best = std::numeric_limits<double>::infinity();
    for (double r : env) {
      if (r > 0.0 && r < best && works_for(r, j)) best = r;
    }
    if (std::isfinite(best)) candidates.push_back(best);
    for (double v : norms[j]) global_max = std::max(global_max, v);
  }
  candidates.push_back(global_max);
  std::sort(candidates.begin(), candidates.end());

  for (double r : candidates) {
    if (!(r > 0.0)) continue;
    bool all = true;
    for (size_t j = 0; j < norms.size() && all; ++j) all = works_for(r, j);
    if (all) return r;
  }
  throw Error("calibrate_absorbing_radius: no candidate radius worked");
}

// ---------------------------------------------------------------------------
// Point clouds: long-time samples, semidistance, box dimension
// ---------------------------------------------------------------------------

template <class State>
struct Cloud {
  std::vector<State> points;
};

using CloudR = Cloud<StateR>;
using CloudA = Cloud<StateA>;

struct DistPhaseR {
  const Mesh* m;
  double operator()(const StateR& a, const StateR& b) const {
    return phase_norm(subtract(a, b), *m);
  }
};

struct DistPhaseA {
  const Mesh* m;
  double eps;
  double operator()(const StateA& a, const StateA& b) const {
    return phase_norm(subtract(a, b), eps, *m);
  }
};

// Late-time samples of the flow: every recorded state with t >= burn_in,
// pooled over the supplied initial conditions.
inline CloudR omega_cloud(const std::vector<StateR>& ics, const Mesh& m,
                          const Nonlinearity& nl, double burn_in,
                          const SimulateOptions& so) {
  ensure(burn_in >= 0.0 && burn_in < so.horizon,
         "omega_cloud: burn_in must lie in [0, horizon)");
  SimulateOptions keep = so;
  keep.keep_states = true;
  CloudR cloud;
  for (const StateR& z0 : ics) {
    TrajectoryRecord rec = simulate(z0, m, nl, keep);
    for (size_t i = 0; i < rec.times.size(); ++i) {
      if (rec.times[i] >= burn_in) cloud.points.push_back(rec.states_r[i]);
    }
  }
  return cloud;
}

inline CloudA omega_cloud(const std::vector<StateA>& ics, double eps,
                          const Mesh& m, const Nonlinearity& nl,
                          const BoundaryNonlinearity& bnl, double burn_in,
                          const SimulateOptions& so) {
  ensure(burn_in >= 0.0 && burn_in < so.horizon,
         "omega_cloud: burn_in must lie in [0, horizon)");
  SimulateOptions keep = so;
  keep.keep_states = true;
  CloudA cloud;
  for (const StateA& z0 : ics) {
    TrajectoryRecord rec = simulate(z0, eps, m, nl, bnl, keep);
    for (size_t i = 0; i < rec.times.size(); ++i) {
      if (rec.times[i] >= burn_in) cloud.points.push_back(rec.states_a[i]);
    }
  }
  return cloud;
}

// Directed Hausdorff semidistance sup_{x in a} inf_{y in b} d(x, y).
// The inner loop stops once the running infimum cannot raise the outer
// supremum; the returned value is identical to the full double loop.
template <class State, class Dist>
inline double hausdorff_semidist(const std::vector<State>& a,
                                 const std::vector<State>& b, Dist dist) {
  ensure(!a.empty() && !b.empty(), "hausdorff_semidist: empty cloud");
  double sup = 0.0;
  for (const State& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const State& y : b) {
      best = std::min(best, dist(x, y));
      if (best <= sup) break;
    }
    sup = std::max(sup, best);
  }
  return sup;
}

// Greedy farthest-point covering count: grow a center set until every
// point lies within radius of some center. Deterministic (first point
// seeds, ties resolved by lowest index).
template <class State, class Dist>
inline int covering_number(const std::vector<State>& pts, double radius,
                           Dist dist) {
  ensure(!pts.empty(), "covering_number: empty cloud");
  ensure(radius > 0.0, "covering_number: radius must be positive");
  std::vector<double> mind(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) mind[i] = dist(pts[i], pts[0]);
  int centers = 1;
  for (;;) {
    size_t far = 0;
    double worst = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (mind[i] > worst) {
        worst = mind[i];
        far = i;
      }
    }
    if (worst <= radius) return centers;
    ++centers;
    for (size_t i = 0; i < pts.size(); ++i)
      mind[i] = std::min(mind[i], dist(pts[i], pts[far]));
  }
}

// Box-counting dimension estimate: slope of log(covering count) against
// log(1/radius) over the supplied radii. A cloud that collapses to a
// single point yields counts of 1 throughout and dimension zero, flagged
// as degenerate rather than an error.
struct DimensionEstimate {
  double dimension = 0.0;
  LineFit fit;
  std::vector<double> radii;
  std::vector<int> counts;
  bool degenerate = false;
};

template <class State, class Dist>
inline DimensionEstimate box_counting_dim(const std::vector<State>& pts,
                                          const std::vector<double>& radii,
                                          Dist dist) {
  ensure(radii.size() >= 2, "box_counting_dim: need at least two radii");
  DimensionEstimate est;
  est.radii = radii;
  std::vector<double> xs, ys;
  bool all_single = true;
  for (double r : radii) {
    int c = covering_number(pts, r, dist);
    est.counts.push_back(c);
    if (c > 1) all_single = false;
    xs.push_back(std::log(1.0 / r));
    ys.push_back(std::log(static_cast<double>(c)));
  }
  est.fit = fit_line(xs, ys);
  est.degenerate = all_single || est.fit.degenerate;
  est.dimension = est.degenerate && all_single ? 0.0 : est.fit.slope;
  return est;
}

}  // namespace wavedyn
