#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "wavedyn/mesh.hpp"
#include "wavedyn/operators.hpp"
#include "wavedyn/tridiag.hpp"

namespace wavedyn {

struct EigenError : Error {
  explicit EigenError(const std::string& msg) : Error(msg) {}
};

// Generalized eigenpairs (K+B) w = lambda M w, smallest first. Vectors are
// M-orthonormal; residuals store |(K+B)w - lambda M w|_2 for each pair.
struct EigenResult {
  std::vector<double> values;
  std::vector<Field> vectors;
  std::vector<double> residuals;
};

namespace detail {

// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
// below x, via the Sturm / LDL' sign count.
inline int sturm_count(const std::vector<double>& diag,
                       const std::vector<double>& off, double x) {
  int n = static_cast<int>(diag.size());
  int count = 0;
  double d = diag[0] - x;
  if (d < 0) ++count;
  const double tiny = std::numeric_limits<double>::min() * 4.0;
  for (int i = 1; i < n; ++i) {
    if (d == 0.0) d = tiny;
    d = (diag[i] - x) - off[i - 1] * off[i - 1] / d;
    if (d < 0) ++count;
  }
  return count;
}

}  // namespace detail

// Solve the lowest k generalized eigenpairs of (K+B, M) on the given mesh.
// Method: symmetrize with D = sqrt(M) to an ordinary symmetric tridiagonal
// problem, locate eigenvalues by Sturm bisection, then recover vectors by
// shifted inverse iteration with deflation against already-converged
// vectors. Fails loudly if any residual exceeds the tolerance.
inline EigenResult eigenpairs(const Mesh& m, int k, double tol = 1e-12,
                              int max_iterations = 80) {
  ensure(k >= 1 && k <= m.n_nodes, "eigenpairs: k out of range");
  int n = m.n_nodes;
  RobinLaplacian rl = assemble_robin_laplacian(m);

  // Symmetrized matrix At = inv(D) (K+B) inv(D), D = diag(sqrt(weight)).
  std::vector<double> sqw(n);
  for (int i = 0; i < n; ++i) sqw[i] = std::sqrt(m.weight[i]);
  std::vector<double> diag(n), off(n - 1);
  for (int i = 0; i < n; ++i) diag[i] = rl.a.diag[i] / m.weight[i];
  for (int i = 0; i + 1 < n; ++i)
    off[i] = rl.a.lower[i] / (sqw[i] * sqw[i + 1]);

  // Gershgorin bracket.
  double lo = diag[0], hi = diag[0];
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }

  // Residual floor scales with the operator norm (the stiffness entries grow
  // like 1/h), so the stopping rule must too or fine meshes can never pass.
  double anorm = 1.0;
  for (int i = 0; i < n; ++i) {
    double r = std::abs(rl.a.diag[i]);
    if (i > 0) r += std::abs(rl.a.lower[i - 1]);
    if (i + 1 < n) r += std::abs(rl.a.upper[i]);
    anorm = std::max(anorm, r);
  }

  EigenResult out;
  std::vector<std::vector<double>> ys;  // converged vectors in y = D w space

  TriDiag shifted = TriDiag::zero(n);
  shifted.lower.assign(off.begin(), off.end());
  shifted.upper.assign(off.begin(), off.end());

  for (int j = 0; j < k; ++j) {
    // Bisect for the (j+1)-th smallest eigenvalue.
    double a = lo, b = hi;
    while (b - a > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b))) {
      double mid = 0.5 * (a + b);
      if (detail::sturm_count(diag, off, mid) >= j + 1)
        b = mid;
      else
        a = mid;
    }
    double shift = 0.5 * (a + b);

    for (int i = 0; i < n; ++i) shifted.diag[i] = diag[i] - shift;
    TriDiagLU lu = factor_pivot(shifted);

    // Deterministic start vector, then iterate solve + deflate + normalize.
    std::vector<double> y(n);
    unsigned long long lc = 88172645463325252ull + 7919ull * (j + 1);
    for (int i = 0; i < n; ++i) {
      lc = lc * 6364136223846793005ull + 1442695040888963407ull;
      y[i] = ((lc >> 11) * 0x1.0p-53) - 0.5;
    }

    double lambda = shift;
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
      solve_pivot(lu, y);
      for (const auto& yc : ys) {  // deflate twice for orthogonality
        for (int pass = 0; pass < 2; ++pass) {
          double dot = 0.0;
          for (int i = 0; i < n; ++i) dot += y[i] * yc[i];
          for (int i = 0; i < n; ++i) y[i] -= dot * yc[i];
        }
      }
      double nrm = 0.0;
      for (int i = 0; i < n; ++i) nrm += y[i] * y[i];
      nrm = std::sqrt(nrm);
      ensure(nrm > 0.0, "eigenpairs: iteration vector collapsed");
      for (int i = 0; i < n; ++i) y[i] /= nrm;

      // Rayleigh quotient and residual in the original pencil.
      Field w(n);
      for (int i = 0; i < n; ++i) w[i] = y[i] / sqw[i];
      Field aw = rl.apply(w);
      double rq = 0.0;
      for (int i = 0; i < n; ++i) rq += w[i] * aw[i];
      lambda = rq;  // w is M-normalized because |y|_2 = 1
      double res = 0.0;
      for (int i = 0; i < n; ++i) {
        double r = aw[i] - lambda * m.weight[i] * w[i];
        res += r * r;
      }
      res = std::sqrt(res);
      if (res <= tol * std::max(std::abs(lambda), anorm)) {
        if (w[0] < 0.0) {  // fix sign for reproducibility
          for (int i = 0; i < n; ++i) {
            w[i] = -w[i];
            y[i] = -y[i];
          }
        }
        out.values.push_back(lambda);
        out.vectors.push_back(w);
        out.residuals.push_back(res);
        ys.push_back(y);
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw EigenError("eigenpairs: inverse iteration failed to reach "
                       "tolerance for pair " + std::to_string(j));
    }
  }
  return out;
}

// First eigenvalue of -u'' on (0,1) with the Robin condition u' n + u = 0
// at both ends: lambda = kappa^2 where kappa is the first positive root of
// tan(kappa) = 2 kappa / (kappa^2 - 1). Solved by bisection on (1, pi).
inline double first_robin_eigenvalue_unit_interval() {
  auto fun = [](double kk) {
    // (kappa^2 - 1) sin - 2 kappa cos: zero-crossing form of the condition,
    // continuous across the kappa = 1 removable point.
    return (kk * kk - 1.0) * std::sin(kk) - 2.0 * kk * std::cos(kk);
  };
  double a = 1.0, b = 3.141592653589793;
  ensure(fun(a) < 0.0 && fun(b) > 0.0,
         "first_robin_eigenvalue: bracket failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (a + b);
    if (fun(mid) < 0.0)
      a = mid;
    else
      b = mid;
    if (b - a < 1e-16 * b) break;
  }
  double kappa = 0.5 * (a + b);
  return kappa * kappa;
}

// Sharpest constant C so that |u|_L2 <= C * sqrt(|grad u|^2 + |u|_Gamma^2)
// on the mesh: 1/sqrt(lambda_1) with lambda_1 the smallest generalized
// eigenvalue of (K+B, M).
inline double poincare_constant(const Mesh& m) {
  return 1.0 / std::sqrt(eigenpairs(m, 1).values[0]);
}

}  // namespace wavedyn
