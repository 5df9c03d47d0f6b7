#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wavedyn/common.hpp"

namespace wavedyn {

// Nodal values on a uniform 1-d grid, endpoints included.
using Field = std::vector<double>;

// Values on the two-point boundary {0, L}: index 0 is the left endpoint.
using BoundaryField = std::array<double, 2>;

// Uniform grid on [0, length] with trapezoid (lumped-mass) quadrature.
// weight[i] is h at interior nodes and h/2 at the two endpoints, so that
// sum(weight) == length and sum_i weight[i]*a[i]*b[i] is the discrete L2
// inner product.
struct Mesh {
  int n_nodes = 0;
  double length = 0.0;
  double h = 0.0;
  std::vector<double> x;       // node coordinates
  std::vector<double> weight;  // lumped quadrature weights

  int n_cells() const { return n_nodes - 1; }
};

inline Mesh build_mesh(int n_cells, double length) {
  ensure(n_cells >= 2, "build_mesh: n_cells must be >= 2");
  ensure(std::isfinite(length) && length > 0.0,
         "build_mesh: length must be positive and finite");
  Mesh m;
  m.n_nodes = n_cells + 1;
  m.length = length;
  m.h = length / n_cells;
  m.x.resize(m.n_nodes);
  m.weight.resize(m.n_nodes);
  for (int i = 0; i < m.n_nodes; ++i) {
    m.x[i] = (i == n_cells) ? length : i * m.h;
    m.weight[i] = (i == 0 || i == n_cells) ? 0.5 * m.h : m.h;
  }
  return m;
}

enum class Inner { L2, H1, L2Gamma };

// Discrete inner products for nodal fields. H1 adds the piecewise-linear
// gradient term sum_cells (da)(db)/h on top of L2. L2Gamma is only defined
// for boundary pairs; requesting it here is an input error.
inline double inner(Inner kind, const Field& a, const Field& b, const Mesh& m) {
  ensure(static_cast<int>(a.size()) == m.n_nodes &&
             static_cast<int>(b.size()) == m.n_nodes,
         "inner: field size does not match mesh");
  ensure(kind != Inner::L2Gamma,
         "inner: L2Gamma requires boundary pairs, not interior fields");
  double s = 0.0;
  for (int i = 0; i < m.n_nodes; ++i) s += m.weight[i] * a[i] * b[i];
  if (kind == Inner::H1) {
    for (int i = 0; i + 1 < m.n_nodes; ++i) {
      s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]) / m.h;
    }
  }
  return s;
}

// Boundary inner product: plain sum over the two endpoint values (the
// boundary measure on a two-point set has unit weights).
inline double inner(Inner kind, const BoundaryField& a, const BoundaryField& b,
                    const Mesh&) {
  ensure(kind == Inner::L2Gamma,
         "inner: boundary pairs only support the L2Gamma product");
  return a[0] * b[0] + a[1] * b[1];
}

inline double norm(Inner kind, const Field& a, const Mesh& m) {
  return std::sqrt(inner(kind, a, a, m));
}

inline double norm(Inner kind, const BoundaryField& a, const Mesh& m) {
  return std::sqrt(inner(kind, a, a, m));
}

// Endpoint values of a nodal field.
inline BoundaryField trace(const Field& u, const Mesh& m) {
  ensure(static_cast<int>(u.size()) == m.n_nodes,
         "trace: field size does not match mesh");
  return {u.front(), u.back()};
}

// Sample a scalar function at the mesh nodes.
inline Field sample(const Mesh& m, const std::function<double(double)>& f) {
  Field u(m.n_nodes);
  for (int i = 0; i < m.n_nodes; ++i) u[i] = f(m.x[i]);
  return u;
}

inline Field zero_field(const Mesh& m) { return Field(m.n_nodes, 0.0); }

}  // namespace wavedyn
