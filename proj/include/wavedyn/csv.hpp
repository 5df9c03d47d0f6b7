#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "wavedyn/common.hpp"
#include "wavedyn/dynamics.hpp"
#include "wavedyn/integrate.hpp"

namespace wavedyn {

// Full-precision, locale-independent float formatting. 17 significant
// digits round-trip any double, and the fixed format keeps repeated runs
// byte-identical.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string fmt_int(long long x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", x);
  return buf;
}

// CSV cell quoting per RFC 4180: cells containing comma, quote, CR or LF
// are wrapped in double quotes with inner quotes doubled.
inline std::string csv_quote(const std::string& cell) {
  bool needs = false;
  for (char c : cell) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    ensure(out_.good(), "CsvWriter: cannot open " + path);
    path_ = path;
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_quote(cells[i]);
    }
    out_ << '\n';
    ensure(out_.good(), "CsvWriter: write failed on " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

// Trajectory CSV: one row per recorded sample. balance_residual holds the
// largest per-step residual since the previous sample; the state norm
// columns split the phase norm into its interior and boundary parts.
inline void write_trajectory_csv(const std::string& path,
                                 const TrajectoryRecord& rec, const Mesh& m,
                                 double dt) {
  CsvWriter w(path);
  w.row({"t", "E_total", "E_quadratic", "E_potential", "dissipation",
         "balance_residual", "phase_norm", "norm_u_h1", "norm_v_l2",
         "norm_boundary"});
  long long prev_step = 0;
  for (size_t i = 0; i < rec.times.size(); ++i) {
    long long step = std::llround(rec.times[i] / dt);
    double res = 0.0;
    for (long long s = prev_step; s < step &&
         s < static_cast<long long>(rec.balance_residuals.size()); ++s) {
      res = std::max(res, std::abs(rec.balance_residuals[s]));
    }
    prev_step = step;
    double uh1 = 0.0, vl2 = 0.0, bnd = 0.0;
    if (rec.acoustic && i < rec.states_a.size()) {
      const StateA& z = rec.states_a[i];
      uh1 = norm(Inner::H1, z.u, m);
      vl2 = norm(Inner::L2, z.v, m);
      bnd = std::sqrt(rec.eps * inner(Inner::L2Gamma, z.delta, z.delta, m) +
                      inner(Inner::L2Gamma, z.gamma, z.gamma, m));
    } else if (!rec.acoustic && i < rec.states_r.size()) {
      const StateR& z = rec.states_r[i];
      uh1 = norm(Inner::H1, z.u, m);
      vl2 = norm(Inner::L2, z.v, m);
    }
    w.row({fmt_double(rec.times[i]), fmt_double(rec.energies[i].total),
           fmt_double(rec.energies[i].quadratic),
           fmt_double(rec.energies[i].potential),
           fmt_double(rec.dissipation[i]), fmt_double(res),
           fmt_double(rec.phase_norms[i]), fmt_double(uh1), fmt_double(vl2),
           fmt_double(bnd)});
  }
}

// Full state snapshots, one row per sample: t then the nodal values of u
// and v (and the four boundary values for acoustic records).
inline void write_snapshots_csv(const std::string& path,
                                const TrajectoryRecord& rec, const Mesh& m) {
  CsvWriter w(path);
  std::vector<std::string> head{"t"};
  for (int i = 0; i < m.n_nodes; ++i) head.push_back("u" + std::to_string(i));
  for (int i = 0; i < m.n_nodes; ++i) head.push_back("v" + std::to_string(i));
  if (rec.acoustic) {
    head.insert(head.end(),
                {"delta_left", "delta_right", "gamma_left", "gamma_right"});
  }
  w.row(head);
  size_t count = rec.acoustic ? rec.states_a.size() : rec.states_r.size();
  ensure(count == rec.times.size(),
         "write_snapshots_csv: record did not keep states");
  for (size_t i = 0; i < count; ++i) {
    std::vector<std::string> cells{fmt_double(rec.times[i])};
    if (rec.acoustic) {
      const StateA& z = rec.states_a[i];
      for (double x : z.u) cells.push_back(fmt_double(x));
      for (double x : z.v) cells.push_back(fmt_double(x));
      cells.push_back(fmt_double(z.delta[0]));
      cells.push_back(fmt_double(z.delta[1]));
      cells.push_back(fmt_double(z.gamma[0]));
      cells.push_back(fmt_double(z.gamma[1]));
    } else {
      const StateR& z = rec.states_r[i];
      for (double x : z.u) cells.push_back(fmt_double(x));
      for (double x : z.v) cells.push_back(fmt_double(x));
    }
    w.row(cells);
  }
}

// ---------------------------------------------------------------------------
// Whitespace-separated plot data with a header comment naming the columns.
// ---------------------------------------------------------------------------

inline void emit_plot_energy(const std::string& path,
                             const TrajectoryRecord& rec, double dt) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "emit_plot_energy: cannot open " + path);
  out << "# t E dissipation residual\n";
  long long prev_step = 0;
  for (size_t i = 0; i < rec.times.size(); ++i) {
    long long step = std::llround(rec.times[i] / dt);
    double res = 0.0;
    for (long long s = prev_step; s < step &&
         s < static_cast<long long>(rec.balance_residuals.size()); ++s) {
      res = std::max(res, std::abs(rec.balance_residuals[s]));
    }
    prev_step = step;
    out << fmt_double(rec.times[i]) << ' '
        << fmt_double(rec.energies[i].total) << ' '
        << fmt_double(rec.dissipation[i]) << ' ' << fmt_double(res) << '\n';
  }
  ensure(out.good(), "emit_plot_energy: write failed on " + path);
}

inline void emit_plot_gap(const std::string& path, const GapCurve& g) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "emit_plot_gap: cannot open " + path);
  out << "# t gap_Heps gap_H0\n";
  for (size_t i = 0; i < g.times.size(); ++i) {
    out << fmt_double(g.times[i]) << ' ' << fmt_double(g.lifted[i]) << ' '
        << fmt_double(g.projected[i]) << '\n';
  }
  ensure(out.good(), "emit_plot_gap: write failed on " + path);
}

// One row per cloud point: phase norm and the mid-node displacement and
// velocity values (a crude but plottable 2-d shadow of the cloud).
inline void emit_plot_cloud(const std::string& path, const CloudR& cloud,
                            const Mesh& m) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "emit_plot_cloud: cannot open " + path);
  out << "# norm u_mid v_mid\n";
  int mid = m.n_nodes / 2;
  for (const StateR& z : cloud.points) {
    out << fmt_double(phase_norm(z, m)) << ' ' << fmt_double(z.u[mid]) << ' '
        << fmt_double(z.v[mid]) << '\n';
  }
  ensure(out.good(), "emit_plot_cloud: write failed on " + path);
}

inline void emit_plot_cloud(const std::string& path, const CloudA& cloud,
                            double eps, const Mesh& m) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "emit_plot_cloud: cannot open " + path);
  out << "# norm u_mid v_mid\n";
  int mid = m.n_nodes / 2;
  for (const StateA& z : cloud.points) {
    out << fmt_double(phase_norm(z, eps, m)) << ' ' << fmt_double(z.u[mid])
        << ' ' << fmt_double(z.v[mid]) << '\n';
  }
  ensure(out.good(), "emit_plot_cloud: write failed on " + path);
}

// Triplet dump (row col value, zeros skipped) for operator inspection.
inline void dump_matrix_triplets(const std::string& path,
                                 const DenseMatrix& mat) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "dump_matrix_triplets: cannot open " + path);
  out << "# row col value\n";
  for (int i = 0; i < mat.rows; ++i) {
    for (int j = 0; j < mat.cols; ++j) {
      double v = mat.at(i, j);
      if (v != 0.0)
        out << i << ' ' << j << ' ' << fmt_double(v) << '\n';
    }
  }
  ensure(out.good(), "dump_matrix_triplets: write failed on " + path);
}

inline void dump_matrix_triplets(const std::string& path, const TriDiag& t) {
  std::ofstream out(path, std::ios::binary);
  ensure(out.good(), "dump_matrix_triplets: cannot open " + path);
  out << "# row col value\n";
  for (int i = 0; i < t.n; ++i) {
    if (i > 0 && t.lower[i - 1] != 0.0)
      out << i << ' ' << (i - 1) << ' ' << fmt_double(t.lower[i - 1]) << '\n';
    if (t.diag[i] != 0.0)
      out << i << ' ' << i << ' ' << fmt_double(t.diag[i]) << '\n';
    if (i + 1 < t.n && t.upper[i] != 0.0)
      out << i << ' ' << (i + 1) << ' ' << fmt_double(t.upper[i]) << '\n';
  }
  ensure(out.good(), "dump_matrix_triplets: write failed on " + path);
}

}  // namespace wavedyn
