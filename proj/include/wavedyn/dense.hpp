#pragma once

#include <cmath>
#include <vector>

#include "wavedyn/common.hpp"

namespace wavedyn {

// Small dense matrix for the operator verification paths (generators, Gram
// matrices, adjoints). Time stepping never touches this type.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

inline DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y) {
  ensure(x.cols == y.rows, "matmul: inner dimension mismatch");
  DenseMatrix z(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) z.at(i, j) += xv * y.at(k, j);
    }
  return z;
}

inline std::vector<double> matvec(const DenseMatrix& m,
                                  const std::vector<double>& x) {
  ensure(static_cast<int>(x.size()) == m.cols, "matvec: size mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m.at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double max_abs(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.a) s = std::max(s, std::abs(v));
  return s;
}

inline DenseMatrix subtract(const DenseMatrix& x, const DenseMatrix& y) {
  ensure(x.rows == y.rows && x.cols == y.cols, "subtract: shape mismatch");
  DenseMatrix z(x.rows, x.cols);
  for (size_t i = 0; i < x.a.size(); ++i) z.a[i] = x.a[i] - y.a[i];
  return z;
}

// Solve A X = B with partial pivoting; A is consumed. Used to form
// inv(W) * (A^T W) when checking adjoints against their expected block
// structure, where W is symmetric positive definite and well conditioned.
inline DenseMatrix solve_lu(DenseMatrix a, DenseMatrix b) {
  ensure(a.rows == a.cols, "solve_lu: matrix must be square");
  ensure(a.rows == b.rows, "solve_lu: rhs row mismatch");
  int n = a.rows;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a.at(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(a.at(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    ensure(best > 0.0, "solve_lu: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(piv, j));
      for (int j = 0; j < b.cols; ++j) std::swap(b.at(k, j), b.at(piv, j));
    }
    for (int i = k + 1; i < n; ++i) {
      double f = a.at(i, k) / a.at(k, k);
      if (f == 0.0) continue;
      a.at(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      for (int j = 0; j < b.cols; ++j) b.at(i, j) -= f * b.at(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < b.cols; ++j) {
      double s = b.at(k, j);
      for (int i = k + 1; i < n; ++i) s -= a.at(k, i) * b.at(i, j);
      b.at(k, j) = s / a.at(k, k);
    }
  }
  return b;
}

}  // namespace wavedyn
