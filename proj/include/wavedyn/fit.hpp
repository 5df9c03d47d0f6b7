#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "wavedyn/common.hpp"

namespace wavedyn {

// Least-squares line through (x_i, y_i): y ~ intercept + slope*x,
// with the root-mean-square residual of the fit.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  int count = 0;
  bool degenerate = false;  // fewer than two distinct abscissae
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  ensure(x.size() == y.size(), "fit_line: size mismatch");
  LineFit f;
  f.count = static_cast<int>(x.size());
  if (f.count == 0) {
    f.degenerate = true;
    return f;
  }
  double sx = 0, sy = 0;
  for (int i = 0; i < f.count; ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / f.count, my = sy / f.count;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < f.count; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    f.degenerate = true;
    f.intercept = my;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (int i = 0; i < f.count; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / f.count);
  return f;
}

// Exponential decay fit d(t) ~ prefactor * exp(-omega * t) on samples with
// t >= window_start, skipping nonpositive distances (they carry no log
// information; typically they mean the distance already hit rounding
// level). omega > 0 means decay. Needs at least three usable samples.
struct ExpFit {
  double prefactor = 0.0;
  double omega = 0.0;
  double rms_log_residual = 0.0;
  int count = 0;
  int skipped_nonpositive = 0;
};

inline ExpFit exp_attraction_fit(const std::vector<double>& t,
                                 const std::vector<double>& d,
                                 double window_start = 1.0) {
  ensure(t.size() == d.size(), "exp_attraction_fit: size mismatch");
  std::vector<double> xs, ys;
  int skipped = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window_start) continue;
    if (!(d[i] > 0.0)) {
      ++skipped;
      continue;
    }
    xs.push_back(t[i]);
    ys.push_back(std::log(d[i]));
  }
  ensure(xs.size() >= 3,
         "exp_attraction_fit: fewer than three usable samples in window");
  LineFit lf = fit_line(xs, ys);
  ensure(!lf.degenerate, "exp_attraction_fit: degenerate abscissae");
  ExpFit e;
  e.prefactor = std::exp(lf.intercept);
  e.omega = -lf.slope;
  e.rms_log_residual = lf.rms_residual;
  e.count = lf.count;
  e.skipped_nonpositive = skipped;
  return e;
}

// Power-law fit y ~ prefactor * x^rate through log-log least squares.
// Used for the eps -> gap scaling law. Nonpositive values are rejected:
// a vanishing gap in the sweep would be a genuine anomaly.
struct PowerFit {
  double prefactor = 0.0;
  double rate = 0.0;
  double rms_log_residual = 0.0;
  int count = 0;
};

inline PowerFit fit_power_law(const std::vector<double>& x,
                              const std::vector<double>& y) {
  ensure(x.size() == y.size(), "fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    // A zero sample has no logarithm; drop it rather than aborting the fit.
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  ensure(lx.size() >= 3,
         "fit_power_law: need at least three positive samples");
  LineFit lf = fit_line(lx, ly);
  ensure(!lf.degenerate, "fit_power_law: degenerate abscissae");
  PowerFit p;
  p.prefactor = std::exp(lf.intercept);
  p.rate = lf.slope;
  p.rms_log_residual = lf.rms_residual;
  p.count = lf.count;
  return p;
}

// Transitivity of exponential attraction: if dist(S(t)B0, B1) <= C1 e^{-a1 t}
// and dist(S(t)B1, B2) <= C2 e^{-a2 t}, with Lipschitz growth constant K
// and prefactor C for the evolution between the sets, then
//   dist(S(t)B0, B2) <= C' e^{-a' t},
//   C' = C*C1 + C2,   a' = a1*a2 / (K + a1 + a2).
inline std::pair<double, double> transitivity_compose(double c, double k,
                                                      double c1, double a1,
                                                      double c2, double a2) {
  ensure(a1 > 0.0 && a2 > 0.0, "transitivity_compose: rates must be positive");
  ensure(k >= 0.0, "transitivity_compose: growth constant must be >= 0");
  double cp = c * c1 + c2;
  double ap = a1 * a2 / (k + a1 + a2);
  return {cp, ap};
}

// Entry time of a trajectory with differential inequality decay rate iota
// starting at distance R from a ball of radius r: t = (r + R) / iota.
inline double entry_time_bound(double r, double radius_start, double iota) {
  ensure(iota > 0.0, "entry_time_bound: iota must be positive");
  return (r + radius_start) / iota;
}

// Largest value of d over samples with t >= t0 (the future-sup envelope,
// evaluated at one point). Helper for absorbing-radius calibration.
inline std::vector<double> future_sup_envelope(const std::vector<double>& d) {
  std::vector<double> env(d.size());
  double running = 0.0;
  for (size_t i = d.size(); i-- > 0;) {
    running = std::max(running, d[i]);
    env[i] = running;
  }
  return env;
}

}  // namespace wavedyn
