#pragma once

#include <vector>

#include "wavedyn/mesh.hpp"
#include "wavedyn/nonlinearity.hpp"
#include "wavedyn/state.hpp"

namespace wavedyn {

// Split of the conserved-up-to-damping energy. quadratic is the squared
// phase norm; potential is 2*integral of F(u); boundary_potential is
// 2*eps*sum of G(delta) over the two endpoints (zero for the Robin
// problem).
struct EnergyBreakdown {
  double quadratic = 0.0;
  double potential = 0.0;
  double boundary_potential = 0.0;
  double total = 0.0;
};

inline double potential_integral(const Field& u, const Mesh& m,
                                 const Nonlinearity& nl) {
  double s = 0.0;
  for (int i = 0; i < m.n_nodes; ++i)
    s += m.weight[i] * nl.antiderivative(u[i]);
  return s;
}

inline EnergyBreakdown energy(const StateR& s, const Mesh& m,
                              const Nonlinearity& nl) {
  EnergyBreakdown e;
  e.quadratic = phase_norm_sq(s, m);
  e.potential = 2.0 * potential_integral(s.u, m, nl);
  e.boundary_potential = 0.0;
  e.total = e.quadratic + e.potential;
  return e;
}

inline EnergyBreakdown energy(const StateA& s, double eps, const Mesh& m,
                              const Nonlinearity& nl,
                              const BoundaryNonlinearity& bnl) {
  EnergyBreakdown e;
  e.quadratic = phase_norm_sq(s, eps, m);
  e.potential = 2.0 * potential_integral(s.u, m, nl);
  e.boundary_potential = 2.0 * eps * (bnl.antiderivative(s.delta[0]) +
                                      bnl.antiderivative(s.delta[1]));
  e.total = e.quadratic + e.potential + e.boundary_potential;
  return e;
}

// Instantaneous dissipation rates: the exact time derivative of the energy
// along solutions is -dissipation.
inline double dissipation_rate(const StateR& s, const Mesh& m) {
  return 2.0 * inner(Inner::L2, s.v, s.v, m);
}

inline double dissipation_rate(const StateA& s, double eps, const Mesh& m) {
  return 2.0 * (inner(Inner::L2, s.v, s.v, m) +
                eps * inner(Inner::L2Gamma, s.gamma, s.gamma, m));
}

// Lyapunov functional for the Robin problem:
//   E0(phi) = |phi|^2 + 2*mu0*(u,v) + 2*integral F(u).
// It is sandwiched between C1*|phi|^2 and C2*|phi|^2(1+|phi|^3) for
// suitable constants, which is what turns decay of E0 into an absorbing
// ball for the phase norm.
inline double lyapunov_e0(const StateR& s, const Mesh& m,
                          const Nonlinearity& nl) {
  return phase_norm_sq(s, m) + 2.0 * nl.mu0 * inner(Inner::L2, s.u, s.v, m) +
         2.0 * potential_integral(s.u, m, nl);
}

struct LyapunovBounds {
  double value = 0.0;
  double lower = 0.0;  // C1 * |phi|^2
  double upper = 0.0;  // C2 * |phi|^2 * (1 + |phi|^3)
  bool sandwich_ok = false;
};

inline LyapunovBounds lyapunov_bounds(const StateR& s, const Mesh& m,
                                      const Nonlinearity& nl, double c1,
                                      double c2) {
  LyapunovBounds b;
  double nsq = phase_norm_sq(s, m);
  double nrm = std::sqrt(nsq);
  b.value = lyapunov_e0(s, m, nl);
  b.lower = c1 * nsq;
  b.upper = c2 * nsq * (1.0 + nrm * nsq);  // |phi|^3 = |phi| * |phi|^2
  b.sandwich_ok = (b.lower <= b.value) && (b.value <= b.upper);
  return b;
}

// Smallest C2 (with a 1.5x safety factor) making the upper sandwich bound
// hold on a supplied sample of states. The caller provides the sample;
// spreading it over several norm scales makes the calibration meaningful.
inline double calibrate_c2(const std::vector<StateR>& states, const Mesh& m,
                           const Nonlinearity& nl) {
  ensure(!states.empty(), "calibrate_c2: empty state sample");
  double worst = 0.0;
  for (const auto& s : states) {
    double nsq = phase_norm_sq(s, m);
    if (nsq <= 0.0) continue;
    double nrm = std::sqrt(nsq);
    double ratio = lyapunov_e0(s, m, nl) / (nsq * (1.0 + nrm * nsq));
    worst = std::max(worst, ratio);
  }
  ensure(worst > 0.0, "calibrate_c2: sample contained no usable state");
  return 1.5 * worst;
}

}  // namespace wavedyn
