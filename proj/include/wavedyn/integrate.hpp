#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wavedyn/energy.hpp"
#include "wavedyn/mesh.hpp"
#include "wavedyn/nonlinearity.hpp"
#include "wavedyn/operators.hpp"
#include "wavedyn/state.hpp"
#include "wavedyn/tridiag.hpp"

namespace wavedyn {

struct SolverOptions {
  double tolerance = 1e-11;  // absolute, on the mass-scaled residual
  int max_iterations = 50;
};

// Raised when the per-step Newton solve stalls. Carries the residual it
// could not push below tolerance.
struct StepFailure : Error {
  double residual = 0.0;
  int iterations = 0;
  StepFailure(const std::string& msg, double res, int iters)
      : Error(msg), residual(res), iterations(iters) {}
};

namespace detail {

// Mass-scaled max norm: max_i |g_i / w_i|. Measures the residual in the
// same units as the velocity equation, independent of h.
inline double scaled_max(const Field& g, const Mesh& m) {
  double s = 0.0;
  for (int i = 0; i < m.n_nodes; ++i)
    s = std::max(s, std::abs(g[i] / m.weight[i]));
  return s;
}

}  // namespace detail

// One implicit midpoint step of the Robin problem
//   u_t = v,   M v_t = -(K+B+M) u - M v - M f(u),
// with f replaced on each node by its difference-quotient mean between the
// old and new displacement. That choice makes the discrete energy balance
//   E(z+) - E(z) + 2*dt*|v_mid|^2 = 0
// hold exactly (up to the Newton residual).
class StepperR {
 public:
  StepperR(const Mesh& m, const Nonlinearity& nl, SolverOptions opts = {})
      : mesh_(m), nl_(nl), opts_(opts), kbm_(stiffness_matrix(m)) {
    // kbm_ = K + B + M
    kbm_.diag[0] += 1.0;
    kbm_.diag[mesh_.n_nodes - 1] += 1.0;
    for (int i = 0; i < mesh_.n_nodes; ++i) kbm_.diag[i] += mesh_.weight[i];
  }

  const Mesh& mesh() const { return mesh_; }
  const Nonlinearity& nonlinearity() const { return nl_; }

  StateR step(const StateR& z, double dt) const {
    int n = mesh_.n_nodes;
    Field vnew = z.v;
    Field g(n), unew(n);

    auto residual = [&](const Field& vn, Field& gout, Field& un) {
      for (int i = 0; i < n; ++i) un[i] = z.u[i] + 0.5 * dt * (z.v[i] + vn[i]);
      for (int i = 0; i < n; ++i) {
        double vm = 0.5 * (z.v[i] + vn[i]);
        double fm = discrete_mean(nl_, z.u[i], un[i]);
        gout[i] = mesh_.weight[i] * (vn[i] - z.v[i]) +
                  dt * mesh_.weight[i] * (vm + fm);
      }
      matvec_add_midpoint(kbm_, dt, z.u, un, gout);
      return detail::scaled_max(gout, mesh_);
    };

    double res = residual(vnew, g, unew);
    for (int it = 0; it < opts_.max_iterations; ++it) {
      if (res <= opts_.tolerance) return finish(z, vnew, dt);

      TriDiag j = jacobian(unew, z.u, dt);
      Field rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = -g[i];
      Field d = solve_thomas(j, rhs);

      // Damped update: halve until the residual decreases.
      double lam = 1.0;
      bool improved = false;
      Field vtry(n), gtry(n), utry(n);
      for (int h = 0; h < 40; ++h) {
        for (int i = 0; i < n; ++i) vtry[i] = vnew[i] + lam * d[i];
        double rtry = residual(vtry, gtry, utry);
        if (rtry < res) {
          vnew.swap(vtry);
          g.swap(gtry);
          unew.swap(utry);
          res = rtry;
          improved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!improved) {
        throw StepFailure("implicit step stalled (no descent direction)", res,
                          it + 1);
      }
    }
    if (res <= opts_.tolerance) return finish(z, vnew, dt);
    throw StepFailure("implicit step did not converge", res,
                      opts_.max_iterations);
  }

 private:
  static void matvec_add_midpoint(const TriDiag& t, double dt, const Field& a,
                                  const Field& b, Field& out) {
    // out += dt * T * (a+b)/2
    int n = t.n;
    for (int i = 0; i < n; ++i) {
      double s = t.diag[i] * 0.5 * (a[i] + b[i]);
      if (i > 0) s += t.lower[i - 1] * 0.5 * (a[i - 1] + b[i - 1]);
      if (i + 1 < n) s += t.upper[i] * 0.5 * (a[i + 1] + b[i + 1]);
      out[i] += dt * s;
    }
  }

  TriDiag jacobian(const Field& unew, const Field& uold, double dt) const {
    int n = mesh_.n_nodes;
    TriDiag j = TriDiag::zero(n);
    double q = 0.25 * dt * dt;
    for (int i = 0; i < n; ++i) {
      double um = 0.5 * (uold[i] + unew[i]);
      j.diag[i] = (1.0 + 0.5 * dt) * mesh_.weight[i] + q * kbm_.diag[i] +
                  q * mesh_.weight[i] * nl_.fprime(um);
    }
    for (int i = 0; i + 1 < n; ++i) {
      j.lower[i] = q * kbm_.lower[i];
      j.upper[i] = q * kbm_.upper[i];
    }
    return j;
  }

  StateR finish(const StateR& z, const Field& vnew, double dt) const {
    int n = mesh_.n_nodes;
    StateR out;
    out.u.resize(n);
    out.v = vnew;
    for (int i = 0; i < n; ++i)
      out.u[i] = z.u[i] + 0.5 * dt * (z.v[i] + vnew[i]);
    return out;
  }

  Mesh mesh_;
  Nonlinearity nl_;
  SolverOptions opts_;
  TriDiag kbm_;
};

// One implicit midpoint step of the acoustic-boundary problem
//   u_t = v,        M v_t = -(K+M) u + T' gamma - M v - M f(u),
//   delta_t = gamma, gamma_t = -eps (gamma + delta + g(delta)) - T v,
// same difference-quotient treatment of f and g, so that
//   E(z+) - E(z) + 2*dt*(|v_mid|^2 + eps*|gamma_mid|^2) = 0
// holds exactly. The Newton system is solved by eliminating the interior
// velocity (one tridiagonal factorization) and a 2x2 Schur complement on
// the boundary momentum. An optional per-step forcing r adds +M r to the
// velocity equation; the decomposition runs use it.
class StepperA {
 public:
  StepperA(const Mesh& m, double eps, const Nonlinearity& nl,
           const BoundaryNonlinearity& bnl, SolverOptions opts = {})
      : mesh_(m), eps_(eps), nl_(nl), bnl_(bnl), opts_(opts),
        km_(stiffness_matrix(m)) {
    ensure(eps > 0.0 && eps <= 1.0, "StepperA: eps must lie in (0, 1]");
    // km_ = K + M
    for (int i = 0; i < mesh_.n_nodes; ++i) km_.diag[i] += mesh_.weight[i];
  }

  const Mesh& mesh() const { return mesh_; }
  double eps() const { return eps_; }

  StateA step(const StateA& z, double dt, const Field* forcing = nullptr) const {
    int n = mesh_.n_nodes;
    int last = n - 1;
    Field vnew = z.v;
    BoundaryField gnew = z.gamma;
    Field gv(n), unew(n);
    BoundaryField gg{0.0, 0.0}, dnew{0.0, 0.0};

    auto residual = [&](const Field& vn, const BoundaryField& gn, Field& gvo,
                        BoundaryField& ggo, Field& un, BoundaryField& dn) {
      for (int i = 0; i < n; ++i) un[i] = z.u[i] + 0.5 * dt * (z.v[i] + vn[i]);
      for (int b = 0; b < 2; ++b)
        dn[b] = z.delta[b] + 0.5 * dt * (z.gamma[b] + gn[b]);
      for (int i = 0; i < n; ++i) {
        double vm = 0.5 * (z.v[i] + vn[i]);
        double fm = discrete_mean(nl_, z.u[i], un[i]);
        double force = forcing ? (*forcing)[i] : 0.0;
        gvo[i] = mesh_.weight[i] * (vn[i] - z.v[i]) +
                 dt * mesh_.weight[i] * (vm + fm - force);
      }
      matvec_add_midpoint(km_, dt, z.u, un, gvo);
      gvo[0] -= dt * 0.5 * (z.gamma[0] + gn[0]);
      gvo[last] -= dt * 0.5 * (z.gamma[1] + gn[1]);
      for (int b = 0; b < 2; ++b) {
        double gm = 0.5 * (z.gamma[b] + gn[b]);
        double dm = 0.5 * (z.delta[b] + dn[b]);
        double gbar = discrete_mean(bnl_, z.delta[b], dn[b]);
        int node = (b == 0) ? 0 : last;
        double vm = 0.5 * (z.v[node] + vn[node]);
        ggo[b] = (gn[b] - z.gamma[b]) + dt * (eps_ * (gm + dm + gbar) + vm);
      }
      double r = detail::scaled_max(gvo, mesh_);
      r = std::max(r, std::max(std::abs(ggo[0]), std::abs(ggo[1])));
      return r;
    };

    double res = residual(vnew, gnew, gv, gg, unew, dnew);
    for (int it = 0; it < opts_.max_iterations; ++it) {
      if (res <= opts_.tolerance)
        return finish(z, vnew, gnew, dt);

      // Newton blocks.
      TriDiag jvv = jacobian_vv(unew, z.u, dt);
      double jvg = -0.5 * dt;  // coupling of gamma into the velocity rows
      double jgv = 0.5 * dt;   // coupling of velocity into the boundary rows
      BoundaryField jgg;
      for (int b = 0; b < 2; ++b) {
        double dm = 0.5 * (z.delta[b] + dnew[b]);
        jgg[b] = 1.0 + 0.5 * dt * eps_ +
                 0.25 * dt * dt * eps_ * (1.0 + bnl_.gprime(dm));
      }

      // Eliminate the velocity block: three tridiagonal solves share jvv.
      Field e0(n, 0.0), e1(n, 0.0), rhs(n);
      e0[0] = 1.0;
      e1[last] = 1.0;
      Field x0 = solve_thomas(jvv, e0);
      Field x1 = solve_thomas(jvv, e1);
      for (int i = 0; i < n; ++i) rhs[i] = gv[i];
      Field y = solve_thomas(jvv, rhs);

      // Schur complement S = Jgg - Jgv inv(Jvv) Jvg on the two boundary
      // unknowns; Jvg has a single entry per column.
      double s00 = jgg[0] - jgv * x0[0] * jvg;
      double s01 = -jgv * x1[0] * jvg;
      double s10 = -jgv * x0[last] * jvg;
      double s11 = jgg[1] - jgv * x1[last] * jvg;
      double r0 = -gg[0] + jgv * y[0];
      double r1 = -gg[1] + jgv * y[last];
      double det = s00 * s11 - s01 * s10;
      ensure(det != 0.0, "StepperA: singular Schur complement");
      double dg0 = (r0 * s11 - r1 * s01) / det;
      double dg1 = (s00 * r1 - s10 * r0) / det;

      Field dv(n);
      for (int i = 0; i < n; ++i)
        dv[i] = -y[i] - jvg * (dg0 * x0[i] + dg1 * x1[i]);

      double lam = 1.0;
      bool improved = false;
      Field vtry(n), gvt(n), ut(n);
      BoundaryField gtry, ggt, dt_try;
      for (int h = 0; h < 40; ++h) {
        for (int i = 0; i < n; ++i) vtry[i] = vnew[i] + lam * dv[i];
        gtry[0] = gnew[0] + lam * dg0;
        gtry[1] = gnew[1] + lam * dg1;
        double rtry = residual(vtry, gtry, gvt, ggt, ut, dt_try);
        if (rtry < res) {
          vnew.swap(vtry);
          gnew = gtry;
          gv.swap(gvt);
          gg = ggt;
          unew.swap(ut);
          dnew = dt_try;
          res = rtry;
          improved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!improved) {
        throw StepFailure("implicit step stalled (no descent direction)", res,
                          it + 1);
      }
    }
    if (res <= opts_.tolerance) return finish(z, vnew, gnew, dt);
    throw StepFailure("implicit step did not converge", res,
                      opts_.max_iterations);
  }

 private:
  static void matvec_add_midpoint(const TriDiag& t, double dt, const Field& a,
                                  const Field& b, Field& out) {
    int n = t.n;
    for (int i = 0; i < n; ++i) {
      double s = t.diag[i] * 0.5 * (a[i] + b[i]);
      if (i > 0) s += t.lower[i - 1] * 0.5 * (a[i - 1] + b[i - 1]);
      if (i + 1 < n) s += t.upper[i] * 0.5 * (a[i + 1] + b[i + 1]);
      out[i] += dt * s;
    }
  }

  TriDiag jacobian_vv(const Field& unew, const Field& uold, double dt) const {
    int n = mesh_.n_nodes;
    TriDiag j = TriDiag::zero(n);
    double q = 0.25 * dt * dt;
    for (int i = 0; i < n; ++i) {
      double um = 0.5 * (uold[i] + unew[i]);
      j.diag[i] = (1.0 + 0.5 * dt) * mesh_.weight[i] + q * km_.diag[i] +
                  q * mesh_.weight[i] * nl_.fprime(um);
    }
    for (int i = 0; i + 1 < n; ++i) {
      j.lower[i] = q * km_.lower[i];
      j.upper[i] = q * km_.upper[i];
    }
    return j;
  }

  StateA finish(const StateA& z, const Field& vnew, const BoundaryField& gnew,
                double dt) const {
    int n = mesh_.n_nodes;
    StateA out;
    out.u.resize(n);
    out.v = vnew;
    out.gamma = gnew;
    for (int i = 0; i < n; ++i)
      out.u[i] = z.u[i] + 0.5 * dt * (z.v[i] + vnew[i]);
    for (int b = 0; b < 2; ++b)
      out.delta[b] = z.delta[b] + 0.5 * dt * (z.gamma[b] + gnew[b]);
    return out;
  }

  Mesh mesh_;
  double eps_;
  Nonlinearity nl_;
  BoundaryNonlinearity bnl_;
  SolverOptions opts_;
  TriDiag km_;
};

// ---------------------------------------------------------------------------
// Trajectory recording
// ---------------------------------------------------------------------------

struct SimulateOptions {
  double horizon = 1.0;      // final time; must be an integer multiple of dt
  double dt = 1e-3;
  int stride = 1;            // record every stride-th step (plus t=0 and t=T)
  bool keep_states = true;   // retain sampled states (norm history otherwise)
  SolverOptions solver;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> phase_norms;          // at sample times
  std::vector<EnergyBreakdown> energies;    // at sample times
  std::vector<double> dissipation;          // instantaneous rate at samples
  std::vector<double> balance_residuals;    // one entry per time step
  std::vector<StateR> states_r;             // filled for the Robin problem
  std::vector<StateA> states_a;             // filled for the acoustic problem
  double eps = 0.0;
  bool acoustic = false;

  double max_balance_residual() const {
    double s = 0.0;
    for (double r : balance_residuals) s = std::max(s, std::abs(r));
    return s;
  }
};

namespace detail {

inline int step_count(double horizon, double dt) {
  ensure(dt > 0.0, "simulate: dt must be positive");
  ensure(horizon > 0.0, "simulate: horizon must be positive");
  double raw = horizon / dt;
  long long steps = std::llround(raw);
  ensure(steps >= 1 && std::abs(raw - static_cast<double>(steps)) <=
                           1e-9 * std::max(1.0, raw),
         "simulate: horizon must be an integer multiple of dt");
  return static_cast<int>(steps);
}

}  // namespace detail

inline TrajectoryRecord simulate(const StateR& init, const Mesh& m,
                                 const Nonlinearity& nl,
                                 const SimulateOptions& so) {
  ensure(so.stride >= 1, "simulate: stride must be >= 1");
  int steps = detail::step_count(so.horizon, so.dt);
  StepperR stepper(m, nl, so.solver);
  TrajectoryRecord rec;
  rec.acoustic = false;
  rec.balance_residuals.reserve(steps);

  StateR z = init;
  auto record = [&](int i, const StateR& s) {
    rec.times.push_back(i * so.dt);
    rec.phase_norms.push_back(phase_norm(s, m));
    rec.energies.push_back(energy(s, m, nl));
    rec.dissipation.push_back(dissipation_rate(s, m));
    if (so.keep_states) rec.states_r.push_back(s);
  };
  record(0, z);

  double e_prev = rec.energies.front().total;
  for (int i = 1; i <= steps; ++i) {
    StateR znext;
    try {
      znext = stepper.step(z, so.dt);
    } catch (const StepFailure& f) {
      throw StepFailure("step " + std::to_string(i) + " (t=" +
                            std::to_string(i * so.dt) + "): " + f.what(),
                        f.residual, f.iterations);
    }
    // Exact balance: E(next) - E(prev) + 2*dt*|v_mid|^2 = 0.
    double e_next = energy(znext, m, nl).total;
    double vmid_sq = 0.0;
    for (int q = 0; q < m.n_nodes; ++q) {
      double vm = 0.5 * (z.v[q] + znext.v[q]);
      vmid_sq += m.weight[q] * vm * vm;
    }
    rec.balance_residuals.push_back(e_next - e_prev + 2.0 * so.dt * vmid_sq);
    e_prev = e_next;
    z = std::move(znext);
    if (i % so.stride == 0 || i == steps) record(i, z);
  }
  return rec;
}

inline TrajectoryRecord simulate(const StateA& init, double eps, const Mesh& m,
                                 const Nonlinearity& nl,
                                 const BoundaryNonlinearity& bnl,
                                 const SimulateOptions& so) {
  ensure(so.stride >= 1, "simulate: stride must be >= 1");
  int steps = detail::step_count(so.horizon, so.dt);
  StepperA stepper(m, eps, nl, bnl, so.solver);
  TrajectoryRecord rec;
  rec.acoustic = true;
  rec.eps = eps;
  rec.balance_residuals.reserve(steps);

  StateA z = init;
  auto record = [&](int i, const StateA& s) {
    rec.times.push_back(i * so.dt);
    rec.phase_norms.push_back(phase_norm(s, eps, m));
    rec.energies.push_back(energy(s, eps, m, nl, bnl));
    rec.dissipation.push_back(dissipation_rate(s, eps, m));
    if (so.keep_states) rec.states_a.push_back(s);
  };
  record(0, z);

  double e_prev = rec.energies.front().total;
  for (int i = 1; i <= steps; ++i) {
    StateA znext;
    try {
      znext = stepper.step(z, so.dt);
    } catch (const StepFailure& f) {
      throw StepFailure("step " + std::to_string(i) + " (t=" +
                            std::to_string(i * so.dt) + "): " + f.what(),
                        f.residual, f.iterations);
    }
    double e_next = energy(znext, eps, m, nl, bnl).total;
    double vmid_sq = 0.0;
    for (int q = 0; q < m.n_nodes; ++q) {
      double vm = 0.5 * (z.v[q] + znext.v[q]);
      vmid_sq += m.weight[q] * vm * vm;
    }
    double gmid_sq = 0.0;
    for (int b = 0; b < 2; ++b) {
      double gm = 0.5 * (z.gamma[b] + znext.gamma[b]);
      gmid_sq += gm * gm;
    }
    rec.balance_residuals.push_back(e_next - e_prev +
                                    2.0 * so.dt * (vmid_sq + eps * gmid_sq));
    e_prev = e_next;
    z = std::move(znext);
    if (i % so.stride == 0 || i == steps) record(i, z);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Initial data and the closed-form modal solution
// ---------------------------------------------------------------------------

// Phase state of the acoustic problem from classical initial data
// (u0, u1, delta0, delta1). The boundary momentum is
//   gamma = eps*delta1 - (1-eps)*trace(u0),
// which makes the defect against the Robin relation scale like eps:
//   gamma + trace(u0) = eps*(delta1 + trace(u0)).
inline StateA initial_data_a(const Field& u0, const Field& u1,
                             const BoundaryField& delta0,
                             const BoundaryField& delta1, double eps,
                             const Mesh& m) {
  ensure(eps > 0.0 && eps <= 1.0, "initial_data_a: eps must lie in (0, 1]");
  BoundaryField tu = trace(u0, m);
  StateA z;
  z.u = u0;
  z.v = u1;
  z.delta = delta0;
  z.gamma = {eps * delta1[0] - (1.0 - eps) * tu[0],
             eps * delta1[1] - (1.0 - eps) * tu[1]};
  return z;
}

// Distance between the acoustic initial state and the lifted interior data:
//   |z0 - L(u0,u1)|_{H_eps} = sqrt(eps*|delta0|^2 + eps^2*|delta1 + u0|^2),
// evaluated in closed form (boundary sums).
inline double initial_lift_gap(const Field& u0, const BoundaryField& delta0,
                               const BoundaryField& delta1, double eps,
                               const Mesh& m) {
  BoundaryField tu = trace(u0, m);
  double d0 = delta0[0] * delta0[0] + delta0[1] * delta0[1];
  double s0 = delta1[0] + tu[0];
  double s1 = delta1[1] + tu[1];
  return std::sqrt(eps * d0 + eps * eps * (s0 * s0 + s1 * s1));
}

// Amplitude of a single damped mode: solution of
//   a'' + a' + (lambda + 1) a = 0, a(0) = a0, a'(0) = a1.
// Covers all three damping regimes; the spectrum here always has
// lambda + 3/4 > 0, the underdamped branch.
inline double damped_mode_amplitude(double lambda, double a0, double a1,
                                    double t) {
  double disc = lambda + 0.75;  // (lambda+1) - 1/4
  double decay = std::exp(-0.5 * t);
  if (disc > 0.0) {
    double w = std::sqrt(disc);
    return decay * (a0 * std::cos(w * t) +
                    (a1 + 0.5 * a0) / w * std::sin(w * t));
  }
  if (disc == 0.0) {
    return decay * (a0 + (a1 + 0.5 * a0) * t);
  }
  double w = std::sqrt(-disc);
  return decay * (a0 * std::cosh(w * t) +
                  (a1 + 0.5 * a0) / w * std::sinh(w * t));
}

}  // namespace wavedyn
