#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "wavedyn/common.hpp"

namespace wavedyn {

// Interior nonlinearity f with antiderivative F (F(0) = 0) and the
// structural constants used by the absorbing-set and decomposition
// formulas:
//   mu0     coercivity margin: s*f(s) >= -kappa_f + (mu0 - 1)*s^2 holds
//           with the catalog values below,
//   kappa_f constant offset in that bound,
//   ell     growth exponent bound on f',
//   ell1    Lipschitz-type constant of f' on bounded sets,
//   ell2    lower bound: f'(s) >= -ell2, so f(s) + ell2*s is monotone.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  std::function<double(double)> antiderivative;
  // Optional closed form of the mean (F(b)-F(a))/(b-a). The generic
  // quotient loses ~ulp(F)/|b-a| to cancellation, which puts a floor on
  // the implicit solver's residual when a node barely moves; a closed
  // form has no such floor and must therefore be supplied whenever one
  // exists. Must satisfy mean(a,b)*(b-a) == F(b)-F(a) exactly in real
  // arithmetic, or the discrete energy balance breaks.
  std::function<double(double, double)> mean;
  double mu0 = 1.0;
  double kappa_f = 0.0;
  double ell = 0.0;
  double ell1 = 0.0;
  double ell2 = 0.0;
};

// Boundary nonlinearity g with antiderivative G (G(0) = 0) and constants
// mu1, kappa_g playing the same coercivity role on the boundary.
struct BoundaryNonlinearity {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> gprime;
  std::function<double(double)> antiderivative;
  // Same contract as Nonlinearity::mean, for (G(b)-G(a))/(b-a).
  std::function<double(double, double)> mean;
  double mu1 = 1.0;
  double kappa_g = 0.0;
};

inline Nonlinearity make_zero_nonlinearity() {
  Nonlinearity n;
  n.name = "zero";
  n.f = [](double) { return 0.0; };
  n.fprime = [](double) { return 0.0; };
  n.antiderivative = [](double) { return 0.0; };
  n.mean = [](double, double) { return 0.0; };
  n.mu0 = 1.0;
  n.kappa_f = 0.0;
  n.ell = 0.0;
  n.ell1 = 0.0;
  n.ell2 = 0.0;
  return n;
}

inline Nonlinearity make_cubic() {
  Nonlinearity n;
  n.name = "cubic";
  n.f = [](double s) { return s * s * s; };
  n.fprime = [](double s) { return 3.0 * s * s; };
  n.antiderivative = [](double s) { return 0.25 * s * s * s * s; };
  // (b^4 - a^4) / (4(b-a)) = (a+b)(a^2+b^2)/4
  n.mean = [](double a, double b) {
    return 0.25 * (a + b) * (a * a + b * b);
  };
  n.mu0 = 1.0;
  n.kappa_f = 0.0;
  n.ell = 3.0;
  n.ell1 = 6.0;
  n.ell2 = 0.0;
  return n;
}

// f(s) = s^3 - lambda*s for lambda in [0,1). The linear pull-back weakens
// the coercivity margin to mu0 = 1 - lambda and gives f' >= -lambda.
inline Nonlinearity make_cubic_minus_linear(double lambda) {
  ensure(lambda >= 0.0 && lambda < 1.0,
         "cubic_minus_linear: lambda must lie in [0,1)");
  Nonlinearity n;
  n.name = "cubic_minus_linear";
  n.f = [lambda](double s) { return s * s * s - lambda * s; };
  n.fprime = [lambda](double s) { return 3.0 * s * s - lambda; };
  n.antiderivative = [lambda](double s) {
    return 0.25 * s * s * s * s - 0.5 * lambda * s * s;
  };
  n.mean = [lambda](double a, double b) {
    return 0.25 * (a + b) * (a * a + b * b) - 0.5 * lambda * (a + b);
  };
  n.mu0 = 1.0 - lambda;
  n.kappa_f = 0.0;
  n.ell = 3.0;
  n.ell1 = 6.0;
  n.ell2 = lambda;
  return n;
}

inline BoundaryNonlinearity make_zero_boundary() {
  BoundaryNonlinearity b;
  b.name = "zero";
  b.g = [](double) { return 0.0; };
  b.gprime = [](double) { return 0.0; };
  b.antiderivative = [](double) { return 0.0; };
  b.mean = [](double, double) { return 0.0; };
  b.mu1 = 1.0;
  b.kappa_g = 0.0;
  return b;
}

// g(s) = rho*sin(s): bounded with bounded derivative, G = rho*(1-cos s).
inline BoundaryNonlinearity make_bounded_sine(double rho) {
  ensure(std::isfinite(rho), "bounded_sine: rho must be finite");
  BoundaryNonlinearity b;
  b.name = "bounded_sine";
  b.g = [rho](double s) { return rho * std::sin(s); };
  b.gprime = [rho](double s) { return rho * std::cos(s); };
  b.antiderivative = [rho](double s) { return rho * (1.0 - std::cos(s)); };
  // (cos a - cos b) / (b-a) = sin((a+b)/2) * sinc((b-a)/2)
  b.mean = [rho](double a, double b) {
    double h = 0.5 * (b - a);
    double sinc = std::abs(h) < 1e-8 ? 1.0 : std::sin(h) / h;
    return rho * std::sin(0.5 * (a + b)) * sinc;
  };
  b.mu1 = 1.0;
  b.kappa_g = 0.0;
  return b;
}

inline Nonlinearity nonlinearity_by_name(const std::string& name,
                                         double param = 0.0) {
  if (name == "zero") return make_zero_nonlinearity();
  if (name == "cubic") return make_cubic();
  if (name == "cubic_minus_linear") return make_cubic_minus_linear(param);
  throw Error("unknown interior nonlinearity: " + name);
}

inline BoundaryNonlinearity boundary_by_name(const std::string& name,
                                             double param = 0.0) {
  if (name == "zero") return make_zero_boundary();
  if (name == "bounded_sine") return make_bounded_sine(param);
  throw Error("unknown boundary nonlinearity: " + name);
}

// Difference-quotient mean of f over [a,b]: (F(b)-F(a))/(b-a), falling back
// to the midpoint value when the gap is below resolution. Using this mean
// in the implicit midpoint step makes the discrete energy balance exact.
inline double discrete_mean(const std::function<double(double)>& f,
                            const std::function<double(double)>& antideriv,
                            double a, double b) {
  double gap = b - a;
  if (std::abs(gap) < 1e-12) return f(0.5 * (a + b));
  return (antideriv(b) - antideriv(a)) / gap;
}

inline double discrete_mean(const Nonlinearity& n, double a, double b) {
  if (n.mean) return n.mean(a, b);
  return discrete_mean(n.f, n.antiderivative, a, b);
}

inline double discrete_mean(const BoundaryNonlinearity& g, double a, double b) {
  if (g.mean) return g.mean(a, b);
  return discrete_mean(g.g, g.antiderivative, a, b);
}

}  // namespace wavedyn
