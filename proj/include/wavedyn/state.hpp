#pragma once

#include <cmath>

#include "wavedyn/mesh.hpp"

namespace wavedyn {

// Phase state for the Robin-damped wave problem: displacement and velocity.
struct StateR {
  Field u;
  Field v;
};

// Phase state for the acoustic-boundary problem: interior pair plus the
// boundary displacement delta and boundary momentum gamma. gamma absorbs
// the eps-scaling of the boundary velocity, which keeps the phase norm and
// the generator uniformly well behaved as eps -> 0.
struct StateA {
  Field u;
  Field v;
  BoundaryField delta{0.0, 0.0};
  BoundaryField gamma{0.0, 0.0};
};

inline StateR zero_state_r(const Mesh& m) {
  return {zero_field(m), zero_field(m)};
}

inline StateA zero_state_a(const Mesh& m) {
  return {zero_field(m), zero_field(m), {0.0, 0.0}, {0.0, 0.0}};
}

// Squared phase norm for the Robin problem:
//   |u|_H1^2 + |u|_Gamma^2 + |v|_L2^2,
// where |u|_H1^2 = |grad u|^2 + |u|^2. The boundary trace of u is part of
// the phase norm here, matching the Robin form a(u,w) = (grad u, grad w)
// + (u,w) + <u,w>_Gamma.
inline double phase_norm_sq(const StateR& s, const Mesh& m) {
  BoundaryField tu = trace(s.u, m);
  return inner(Inner::H1, s.u, s.u, m) + inner(Inner::L2Gamma, tu, tu, m) +
         inner(Inner::L2, s.v, s.v, m);
}

inline double phase_norm(const StateR& s, const Mesh& m) {
  return std::sqrt(phase_norm_sq(s, m));
}

// Squared phase norm for the acoustic-boundary problem:
//   |u|_H1^2 + |v|_L2^2 + eps*|delta|_Gamma^2 + |gamma|_Gamma^2.
// No trace term on u: the boundary carries its own displacement.
inline double phase_norm_sq(const StateA& s, double eps, const Mesh& m) {
  return inner(Inner::H1, s.u, s.u, m) + inner(Inner::L2, s.v, s.v, m) +
         eps * inner(Inner::L2Gamma, s.delta, s.delta, m) +
         inner(Inner::L2Gamma, s.gamma, s.gamma, m);
}

inline double phase_norm(const StateA& s, double eps, const Mesh& m) {
  return std::sqrt(phase_norm_sq(s, eps, m));
}

// Drop the boundary components.
inline StateR project(const StateA& z) { return {z.u, z.v}; }

// Canonical boundary extension of an interior state: delta = 0 and
// gamma = -trace(u), i.e. the boundary momentum that makes the lifted
// state satisfy the Robin relation gamma + trace(u) = 0 exactly.
inline StateA lift(const StateR& s, const Mesh& m) {
  BoundaryField tu = trace(s.u, m);
  return {s.u, s.v, {0.0, 0.0}, {-tu[0], -tu[1]}};
}

// Difference of acoustic states (same mesh assumed).
inline StateA subtract(const StateA& a, const StateA& b) {
  StateA d = a;
  for (size_t i = 0; i < d.u.size(); ++i) d.u[i] -= b.u[i];
  for (size_t i = 0; i < d.v.size(); ++i) d.v[i] -= b.v[i];
  for (int i = 0; i < 2; ++i) {
    d.delta[i] -= b.delta[i];
    d.gamma[i] -= b.gamma[i];
  }
  return d;
}

inline StateR subtract(const StateR& a, const StateR& b) {
  StateR d = a;
  for (size_t i = 0; i < d.u.size(); ++i) d.u[i] -= b.u[i];
  for (size_t i = 0; i < d.v.size(); ++i) d.v[i] -= b.v[i];
  return d;
}

// Gap between an acoustic state and an interior state, measured two ways:
//   lifted:    |z - L(phi)|_{H_eps}  (compare in the acoustic space)
//   projected: |Pi(z) - phi|_{H_0}   (compare interior parts only)
inline double lifted_gap(const StateA& z, const StateR& phi, double eps,
                         const Mesh& m) {
  return phase_norm(subtract(z, lift(phi, m)), eps, m);
}

inline double projected_gap(const StateA& z, const StateR& phi,
                            const Mesh& m) {
  return phase_norm(subtract(project(z), phi), m);
}

}  // namespace wavedyn
