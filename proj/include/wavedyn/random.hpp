#pragma once

#include <cstdint>
#include <random>

#include "wavedyn/eigen.hpp"
#include "wavedyn/integrate.hpp"
#include "wavedyn/state.hpp"

namespace wavedyn {

// Deterministic random source. The engine is the standard mt19937_64 and
// the mapping to doubles is spelled out here (53-bit mantissa scaling)
// instead of going through std::uniform_real_distribution, whose output
// is not pinned down by the standard and may differ across library
// implementations. Reproducibility across toolchains matters more than
// distribution shape refinements.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Random smooth interior state: coefficients of the given discrete modes
// drawn uniformly from [-1,1] for displacement and velocity, then the
// whole state scaled to the requested phase norm.
inline StateR random_state_r(const EigenResult& modes, double target_norm,
                             Rng& rng, const Mesh& m) {
  ensure(!modes.vectors.empty(), "random_state_r: no modes supplied");
  ensure(target_norm > 0.0, "random_state_r: target norm must be positive");
  int n = m.n_nodes;
  StateR s = zero_state_r(m);
  for (const Field& w : modes.vectors) {
    double a = rng.uniform(-1.0, 1.0);
    double b = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      s.u[i] += a * w[i];
      s.v[i] += b * w[i];
    }
  }
  double nrm = phase_norm(s, m);
  ensure(nrm > 0.0, "random_state_r: degenerate draw");
  double c = target_norm / nrm;
  for (int i = 0; i < n; ++i) {
    s.u[i] *= c;
    s.v[i] *= c;
  }
  return s;
}

// Random acoustic state: a random modal interior pair plus boundary data
// drawn uniformly from [-1,1], assembled through the compatible initial
// data map and scaled as a whole to the requested phase norm. Scaling the
// classical data by a constant scales the assembled state by the same
// constant, so the result stays in the image of the initial-data map.
inline StateA random_state_a(const EigenResult& modes, double target_norm,
                             double eps, Rng& rng, const Mesh& m) {
  ensure(!modes.vectors.empty(), "random_state_a: no modes supplied");
  ensure(target_norm > 0.0, "random_state_a: target norm must be positive");
  int n = m.n_nodes;
  Field u0(n, 0.0), u1(n, 0.0);
  for (const Field& w : modes.vectors) {
    double a = rng.uniform(-1.0, 1.0);
    double b = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      u0[i] += a * w[i];
      u1[i] += b * w[i];
    }
  }
  BoundaryField d0{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  BoundaryField d1{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  StateA z = initial_data_a(u0, u1, d0, d1, eps, m);
  double nrm = phase_norm(z, eps, m);
  ensure(nrm > 0.0, "random_state_a: degenerate draw");
  double c = target_norm / nrm;
  for (int i = 0; i < n; ++i) {
    z.u[i] *= c;
    z.v[i] *= c;
  }
  for (int b = 0; b < 2; ++b) {
    z.delta[b] *= c;
    z.gamma[b] *= c;
  }
  return z;
}

// Independent uniform nodal values; used for inequality checks that should
// hold for arbitrary (not necessarily smooth) fields.
inline Field random_field(Rng& rng, const Mesh& m, double lo = -1.0,
                          double hi = 1.0) {
  Field u(m.n_nodes);
  for (int i = 0; i < m.n_nodes; ++i) u[i] = rng.uniform(lo, hi);
  return u;
}

}  // namespace wavedyn
