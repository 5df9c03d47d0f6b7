#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "wavedyn/common.hpp"

namespace wavedyn {

// Tridiagonal matrix: lower[i] = A(i+1,i), diag[i] = A(i,i),
// upper[i] = A(i,i+1).
struct TriDiag {
  int n = 0;
  std::vector<double> lower;  // size n-1
  std::vector<double> diag;   // size n
  std::vector<double> upper;  // size n-1

  static TriDiag zero(int n) {
    TriDiag t;
    t.n = n;
    t.lower.assign(n - 1, 0.0);
    t.diag.assign(n, 0.0);
    t.upper.assign(n - 1, 0.0);
    return t;
  }
};

inline void matvec(const TriDiag& t, const std::vector<double>& x,
                   std::vector<double>& y) {
  ensure(static_cast<int>(x.size()) == t.n, "matvec: size mismatch");
  y.resize(t.n);
  for (int i = 0; i < t.n; ++i) {
    double s = t.diag[i] * x[i];
    if (i > 0) s += t.lower[i - 1] * x[i - 1];
    if (i + 1 < t.n) s += t.upper[i] * x[i + 1];
    y[i] = s;
  }
}

// y = y + c * T x
inline void matvec_add(const TriDiag& t, double c, const std::vector<double>& x,
                       std::vector<double>& y) {
  for (int i = 0; i < t.n; ++i) {
    double s = t.diag[i] * x[i];
    if (i > 0) s += t.lower[i - 1] * x[i - 1];
    if (i + 1 < t.n) s += t.upper[i] * x[i + 1];
    y[i] += c * s;
  }
}

// Thomas algorithm without pivoting. Safe for the diagonally dominant
// symmetric positive definite systems produced by the implicit time steps;
// a vanishing pivot is reported as an error rather than patched.
inline std::vector<double> solve_thomas(const TriDiag& t,
                                        const std::vector<double>& rhs) {
  ensure(static_cast<int>(rhs.size()) == t.n, "solve_thomas: size mismatch");
  int n = t.n;
  std::vector<double> c(n - 1), d(n), x(n);
  double piv = t.diag[0];
  ensure(piv != 0.0, "solve_thomas: zero pivot");
  if (n > 1) c[0] = t.upper[0] / piv;
  d[0] = rhs[0] / piv;
  for (int i = 1; i < n; ++i) {
    piv = t.diag[i] - t.lower[i - 1] * c[i - 1];
    ensure(piv != 0.0, "solve_thomas: zero pivot");
    if (i + 1 < n) c[i] = t.upper[i] / piv;
    d[i] = (rhs[i] - t.lower[i - 1] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// Partial-pivoting LU of a tridiagonal matrix. Row swaps introduce fill-in
// on a second superdiagonal. Needed for shifted systems in inverse
// iteration, which are indefinite and near-singular by design; pivots that
// collapse to zero are floored at eps*|A| so the solve stays finite (the
// classic inverse-iteration safeguard).
struct TriDiagLU {
  int n = 0;
  std::vector<double> dl;   // multipliers, size n-1
  std::vector<double> d;    // pivots, size n
  std::vector<double> du;   // first superdiagonal, size n-1
  std::vector<double> du2;  // fill-in superdiagonal, size n-2
  std::vector<int> swapped;  // 1 if rows i,i+1 swapped at step i
};

inline TriDiagLU factor_pivot(const TriDiag& t) {
  int n = t.n;
  TriDiagLU f;
  f.n = n;
  f.dl = t.lower;
  f.d = t.diag;
  f.du = t.upper;
  f.du2.assign(n >= 2 ? n - 2 : 0, 0.0);
  f.swapped.assign(n >= 1 ? n - 1 : 0, 0);

  double anorm = 0.0;
  for (double v : t.diag) anorm = std::max(anorm, std::abs(v));
  for (double v : t.lower) anorm = std::max(anorm, std::abs(v));
  for (double v : t.upper) anorm = std::max(anorm, std::abs(v));
  const double floor_piv =
      std::numeric_limits<double>::epsilon() * std::max(anorm, 1.0);

  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(f.d[i]) >= std::abs(f.dl[i])) {
      if (std::abs(f.d[i]) < floor_piv)
        f.d[i] = (f.d[i] < 0 ? -floor_piv : floor_piv);
      double fact = f.dl[i] / f.d[i];
      f.dl[i] = fact;
      f.d[i + 1] -= fact * f.du[i];
      if (i + 2 < n) f.du2[i] = 0.0;
    } else {
      double fact = f.d[i] / f.dl[i];
      f.d[i] = f.dl[i];
      f.dl[i] = fact;
      double tmp = f.du[i];
      f.du[i] = f.d[i + 1];
      f.d[i + 1] = tmp - fact * f.d[i + 1];
      if (i + 2 < n) {
        f.du2[i] = f.du[i + 1];
        f.du[i + 1] = -fact * f.du[i + 1];
      }
      f.swapped[i] = 1;
    }
  }
  if (n >= 1 && std::abs(f.d[n - 1]) < floor_piv)
    f.d[n - 1] = (f.d[n - 1] < 0 ? -floor_piv : floor_piv);
  return f;
}

inline void solve_pivot(const TriDiagLU& f, std::vector<double>& b) {
  ensure(static_cast<int>(b.size()) == f.n, "solve_pivot: size mismatch");
  int n = f.n;
  for (int i = 0; i + 1 < n; ++i) {
    if (!f.swapped[i]) {
      b[i + 1] -= f.dl[i] * b[i];
    } else {
      double tmp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tmp - f.dl[i] * b[i];
    }
  }
  b[n - 1] /= f.d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - f.du[n - 2] * b[n - 1]) / f.d[n - 2];
  for (int i = n - 3; i >= 0; --i) {
    b[i] = (b[i] - f.du[i] * b[i + 1] - f.du2[i] * b[i + 2]) / f.d[i];
  }
}

}  // namespace wavedyn
