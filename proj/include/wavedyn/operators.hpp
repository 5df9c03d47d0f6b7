#pragma once

#include <vector>

#include "wavedyn/dense.hpp"
#include "wavedyn/mesh.hpp"
#include "wavedyn/state.hpp"
#include "wavedyn/tridiag.hpp"

namespace wavedyn {

// Stiffness matrix of piecewise-linear elements on the uniform grid:
// (1/h) * tridiag(-1, [1,2,...,2,1], -1). Represents (grad u, grad w).
inline TriDiag stiffness_matrix(const Mesh& m) {
  TriDiag k = TriDiag::zero(m.n_nodes);
  double ih = 1.0 / m.h;
  for (int i = 0; i < m.n_nodes; ++i) {
    bool end = (i == 0 || i == m.n_nodes - 1);
    k.diag[i] = end ? ih : 2.0 * ih;
  }
  for (int i = 0; i + 1 < m.n_nodes; ++i) {
    k.lower[i] = -ih;
    k.upper[i] = -ih;
  }
  return k;
}

// Lumped interior mass: diag(weight). Kept as a plain vector.
inline const std::vector<double>& mass_diagonal(const Mesh& m) {
  return m.weight;
}

// Boundary mass: identity on the two endpoint nodes, zero elsewhere.
// Only its action is ever needed, so expose it as apply helpers.
inline void add_boundary_mass(const Field& u, double c, Field& out,
                              const Mesh& m) {
  out[0] += c * u[0];
  out[m.n_nodes - 1] += c * u[m.n_nodes - 1];
}

// Adjoint of the trace: place boundary values at the endpoint rows.
inline Field inject_boundary(const BoundaryField& g, const Mesh& m) {
  Field out(m.n_nodes, 0.0);
  out[0] = g[0];
  out[m.n_nodes - 1] = g[1];
  return out;
}

// Second-order elliptic part with Robin flux: A = K + B, where K is the
// stiffness matrix and B the boundary mass. Its plain-dot quadratic form
// u.(Au) equals |grad u|^2 + u(0)^2 + u(L)^2.
struct RobinLaplacian {
  TriDiag a;  // K + B

  Field apply(const Field& u) const {
    Field y;
    matvec(a, u, y);
    return y;
  }

  // u.(A w) in the plain Euclidean sense.
  double energy_product(const Field& u, const Field& w) const {
    Field aw;
    matvec(a, w, aw);
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * aw[i];
    return s;
  }
};

inline RobinLaplacian assemble_robin_laplacian(const Mesh& m) {
  RobinLaplacian r{stiffness_matrix(m)};
  r.a.diag[0] += 1.0;
  r.a.diag[m.n_nodes - 1] += 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Dense first-order generators and their Gram geometry. These exist for
// verification: the adjoint structure and the dissipation identities are
// checked exactly on small meshes. Time stepping never forms them.
// ---------------------------------------------------------------------------

// Unknown ordering for the dense blocks: interior state (u, v) for the
// Robin problem; (u, v, delta, gamma) for the acoustic problem, boundary
// components last, left endpoint before right.
inline int stacked_dim_r(const Mesh& m) { return 2 * m.n_nodes; }
inline int stacked_dim_a(const Mesh& m) { return 2 * m.n_nodes + 4; }

inline std::vector<double> stack(const StateR& s) {
  std::vector<double> x;
  x.reserve(2 * s.u.size());
  x.insert(x.end(), s.u.begin(), s.u.end());
  x.insert(x.end(), s.v.begin(), s.v.end());
  return x;
}

inline std::vector<double> stack(const StateA& s) {
  std::vector<double> x;
  x.reserve(2 * s.u.size() + 4);
  x.insert(x.end(), s.u.begin(), s.u.end());
  x.insert(x.end(), s.v.begin(), s.v.end());
  x.push_back(s.delta[0]);
  x.push_back(s.delta[1]);
  x.push_back(s.gamma[0]);
  x.push_back(s.gamma[1]);
  return x;
}

// Linear generator of the Robin problem on (u, v):
//   du/dt = v
//   dv/dt = -inv(M)(K+B) u - u - v
inline DenseMatrix generator_r(const Mesh& m) {
  int n = m.n_nodes;
  DenseMatrix g(2 * n, 2 * n);
  RobinLaplacian rl = assemble_robin_laplacian(m);
  for (int i = 0; i < n; ++i) g.at(i, n + i) = 1.0;
  for (int i = 0; i < n; ++i) {
    double wi = m.weight[i];
    g.at(n + i, i) = -rl.a.diag[i] / wi - 1.0;
    if (i > 0) g.at(n + i, i - 1) = -rl.a.lower[i - 1] / wi;
    if (i + 1 < n) g.at(n + i, i + 1) = -rl.a.upper[i] / wi;
    g.at(n + i, n + i) = -1.0;
  }
  return g;
}

// Linear generator of the acoustic-boundary problem on (u, v, delta, gamma):
//   du/dt     = v
//   M dv/dt   = -(K+M) u + T' gamma - M v
//   d delta/dt = gamma
//   d gamma/dt = -eps (gamma + delta) - T v
inline DenseMatrix generator_a(const Mesh& m, double eps) {
  ensure(eps > 0.0 && eps <= 1.0,
         "generator_a: coupling strength must lie in (0, 1]");
  int n = m.n_nodes;
  int dim = 2 * n + 4;
  int od = 2 * n;      // delta offset
  int og = 2 * n + 2;  // gamma offset
  DenseMatrix g(dim, dim);
  TriDiag k = stiffness_matrix(m);
  for (int i = 0; i < n; ++i) g.at(i, n + i) = 1.0;
  for (int i = 0; i < n; ++i) {
    double wi = m.weight[i];
    g.at(n + i, i) = -k.diag[i] / wi - 1.0;  // -(K+M)/M on the diagonal
    if (i > 0) g.at(n + i, i - 1) = -k.lower[i - 1] / wi;
    if (i + 1 < n) g.at(n + i, i + 1) = -k.upper[i] / wi;
    g.at(n + i, n + i) = -1.0;
  }
  g.at(n + 0, og + 0) = 1.0 / m.weight[0];        // inv(M) T' gamma
  g.at(n + n - 1, og + 1) = 1.0 / m.weight[n - 1];
  g.at(od + 0, og + 0) = 1.0;
  g.at(od + 1, og + 1) = 1.0;
  g.at(og + 0, og + 0) = -eps;
  g.at(og + 1, og + 1) = -eps;
  g.at(og + 0, od + 0) = -eps;
  g.at(og + 1, od + 1) = -eps;
  g.at(og + 0, n + 0) = -1.0;  // -T v
  g.at(og + 1, n + n - 1) = -1.0;
  return g;
}

// Gram matrix of the Robin phase space: blockdiag(K + M + B, M).
inline DenseMatrix gram_r(const Mesh& m) {
  int n = m.n_nodes;
  DenseMatrix w(2 * n, 2 * n);
  RobinLaplacian rl = assemble_robin_laplacian(m);
  for (int i = 0; i < n; ++i) {
    w.at(i, i) = rl.a.diag[i] + m.weight[i];
    if (i > 0) w.at(i, i - 1) = rl.a.lower[i - 1];
    if (i + 1 < n) w.at(i, i + 1) = rl.a.upper[i];
    w.at(n + i, n + i) = m.weight[i];
  }
  return w;
}

// Gram matrix of the acoustic phase space:
// blockdiag(K + M, M, eps*I2, I2).
inline DenseMatrix gram_a(const Mesh& m, double eps) {
  ensure(eps > 0.0 && eps <= 1.0,
         "gram_a: coupling strength must lie in (0, 1]");
  int n = m.n_nodes;
  int dim = 2 * n + 4;
  DenseMatrix w(dim, dim);
  TriDiag k = stiffness_matrix(m);
  for (int i = 0; i < n; ++i) {
    w.at(i, i) = k.diag[i] + m.weight[i];
    if (i > 0) w.at(i, i - 1) = k.lower[i - 1];
    if (i + 1 < n) w.at(i, i + 1) = k.upper[i];
    w.at(n + i, n + i) = m.weight[i];
  }
  w.at(2 * n + 0, 2 * n + 0) = eps;
  w.at(2 * n + 1, 2 * n + 1) = eps;
  w.at(2 * n + 2, 2 * n + 2) = 1.0;
  w.at(2 * n + 3, 2 * n + 3) = 1.0;
  return w;
}

// Adjoint with respect to a Gram matrix: A* = inv(W) A' W.
inline DenseMatrix gram_adjoint(const DenseMatrix& gen, const DenseMatrix& gram) {
  return solve_lu(gram, matmul(transpose(gen), gram));
}

// Expected adjoint of the Robin generator, written directly from the
// closed-form block pattern: [[0, -I], [inv(M)(K+M+B), -I]]. The sign of
// the velocity coupling flips relative to the generator; the damping
// block does not.
inline DenseMatrix expected_adjoint_r(const Mesh& m) {
  int n = m.n_nodes;
  DenseMatrix g(2 * n, 2 * n);
  RobinLaplacian rl = assemble_robin_laplacian(m);
  for (int i = 0; i < n; ++i) g.at(i, n + i) = -1.0;
  for (int i = 0; i < n; ++i) {
    double wi = m.weight[i];
    g.at(n + i, i) = rl.a.diag[i] / wi + 1.0;
    if (i > 0) g.at(n + i, i - 1) = rl.a.lower[i - 1] / wi;
    if (i + 1 < n) g.at(n + i, i + 1) = rl.a.upper[i] / wi;
    g.at(n + i, n + i) = -1.0;
  }
  return g;
}

// Expected adjoint of the acoustic generator. All couplings flip sign
// (including the boundary flux pair T / T'), the damping blocks keep
// theirs, and the adjoint domain pairs the flux with +xi rather than -xi:
// concretely the (gamma, delta) block flips from -eps to +eps while the
// (gamma, gamma) block stays at -eps.
inline DenseMatrix expected_adjoint_a(const Mesh& m, double eps) {
  int n = m.n_nodes;
  int dim = 2 * n + 4;
  int od = 2 * n;
  int og = 2 * n + 2;
  DenseMatrix g(dim, dim);
  TriDiag k = stiffness_matrix(m);
  for (int i = 0; i < n; ++i) g.at(i, n + i) = -1.0;
  for (int i = 0; i < n; ++i) {
    double wi = m.weight[i];
    g.at(n + i, i) = k.diag[i] / wi + 1.0;  // +inv(M)(K+M)
    if (i > 0) g.at(n + i, i - 1) = k.lower[i - 1] / wi;
    if (i + 1 < n) g.at(n + i, i + 1) = k.upper[i] / wi;
    g.at(n + i, n + i) = -1.0;
  }
  g.at(n + 0, og + 0) = -1.0 / m.weight[0];  // -inv(M) T' gamma
  g.at(n + n - 1, og + 1) = -1.0 / m.weight[n - 1];
  g.at(od + 0, og + 0) = -1.0;
  g.at(od + 1, og + 1) = -1.0;
  g.at(og + 0, og + 0) = -eps;
  g.at(og + 1, og + 1) = -eps;
  g.at(og + 0, od + 0) = eps;
  g.at(og + 1, od + 1) = eps;
  g.at(og + 0, n + 0) = 1.0;  // +T v
  g.at(og + 1, n + n - 1) = 1.0;
  return g;
}

// Max-abs entry of (inv(W) A' W - expected adjoint).
inline double adjoint_defect(const DenseMatrix& gen, const DenseMatrix& gram,
                             const DenseMatrix& expected) {
  return max_abs(subtract(gram_adjoint(gen, gram), expected));
}

// Gram pairing <A x, x>_W, used by the dissipation identity checks.
inline double generator_pairing(const DenseMatrix& gen, const DenseMatrix& gram,
                                const std::vector<double>& x) {
  std::vector<double> ax = matvec(gen, x);
  std::vector<double> wax = matvec(gram, ax);
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * wax[i];
  return s;
}

// Exact dissipation identity defects. For the Robin generator the pairing
// equals -|v|^2; for the acoustic generator it equals -|v|^2 - eps*|gamma|^2.
inline double dissipation_defect_r(const DenseMatrix& gen,
                                   const DenseMatrix& gram, const StateR& s,
                                   const Mesh& m) {
  double p = generator_pairing(gen, gram, stack(s));
  return std::abs(p + inner(Inner::L2, s.v, s.v, m));
}

inline double dissipation_defect_a(const DenseMatrix& gen,
                                   const DenseMatrix& gram, const StateA& s,
                                   double eps, const Mesh& m) {
  double p = generator_pairing(gen, gram, stack(s));
  return std::abs(p + inner(Inner::L2, s.v, s.v, m) +
                  eps * inner(Inner::L2Gamma, s.gamma, s.gamma, m));
}

}  // namespace wavedyn
