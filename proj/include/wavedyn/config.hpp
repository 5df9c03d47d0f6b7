#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavedyn/common.hpp"

namespace wavedyn {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Raised on malformed or invalid configuration; the message always names
// the offending field path.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct MeshConfig {
  int n_cells = 200;
  double length = 1.0;
};

struct ProblemConfig {
  std::string kind = "R";                 // "R" or "A"
  double epsilon = 1.0;                   // for kind "A"
  std::vector<double> epsilon_grid;       // for sweep/decompose experiments
};

struct NonlinearityConfig {
  std::string name = "cubic";  // zero | cubic | cubic_minus_linear
  double lambda = 0.0;         // parameter of cubic_minus_linear
};

struct BoundaryConfig {
  std::string name = "zero";  // zero | bounded_sine
  double rho = 0.0;           // amplitude of bounded_sine
};

struct TimeConfig {
  double horizon = 5.0;
  double dt = 1e-3;
  int stride = 10;
  double burn_in = 0.0;
};

struct SolverConfig {
  double tolerance = 1e-11;
  int max_iterations = 50;
};

struct ConstantsConfig {
  double eta = 0.25;
  double m0 = 0.1;
  double m1 = 0.1;
  double c1 = 0.25;
  double c2 = 0.0;  // <= 0 requests calibration from a seeded state sample
  double iota = 0.1;
  double beta = 1.0;
};

struct InitialConfig {
  std::string kind = "random_modes";  // random_modes | cosine_profile
  int count = 1;                      // number of initial states / pairs
  int modes = 8;                      // modal basis size for random draws
  double target_norm = 1.0;
  double max_norm = 5.0;    // for experiments that spread norms up to a cap
  double pair_gap = 0.1;    // relative gap when drawing pairs
  std::array<double, 2> delta0{1.0, -0.5};
  std::array<double, 2> delta1{0.3, 0.6};
};

struct OutputConfig {
  std::string directory = "out";
  bool snapshots = false;
};

struct FitConfig {
  double window_start = 1.0;  // exclude early transients from rate fits
};

struct ExperimentConfig {
  std::string experiment = "check";
  MeshConfig mesh;
  ProblemConfig problem;
  NonlinearityConfig nonlinearity;
  BoundaryConfig boundary;
  TimeConfig time;
  SolverConfig solver;
  ConstantsConfig constants;
  InitialConfig initial;
  OutputConfig output;
  FitConfig fit;
  int eigen_count = 8;
  std::uint64_t seed = 12345;
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::string& section,
                                std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw ConfigError(section + "." + it.key() + ": unknown field");
  }
}

inline double get_num(const json& j, const std::string& section,
                      const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(section + "." + key + ": must be a number");
  return v.get<double>();
}

inline int get_int(const json& j, const std::string& section, const char* key,
                   int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(section + "." + key + ": must be an integer");
  return v.get<int>();
}

inline bool get_bool(const json& j, const std::string& section,
                     const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean())
    throw ConfigError(section + "." + key + ": must be a boolean");
  return v.get<bool>();
}

inline std::string get_str(const json& j, const std::string& section,
                           const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string())
    throw ConfigError(section + "." + key + ": must be a string");
  return v.get<std::string>();
}

inline void require(bool cond, const std::string& field,
                    const std::string& what) {
  if (!cond) throw ConfigError(field + ": " + what);
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  ExperimentConfig c;
  reject_unknown_keys(j, "<root>",
                      {"experiment", "mesh", "problem", "nonlinearity",
                       "boundary", "time", "solver", "constants", "initial",
                       "output", "fit", "eigen_count", "seed"});

  c.experiment = get_str(j, "<root>", "experiment", c.experiment);
  static const char* kinds[] = {"simulate",  "eigen",     "sweep_epsilon",
                                "lipschitz", "absorbing", "attractor",
                                "decompose", "check"};
  bool known_kind = false;
  for (const char* k : kinds) known_kind |= (c.experiment == k);
  require(known_kind, "experiment",
          "must be one of simulate|eigen|sweep_epsilon|lipschitz|absorbing|"
          "attractor|decompose|check");

  if (j.contains("mesh")) {
    const json& s = j.at("mesh");
    reject_unknown_keys(s, "mesh", {"n_cells", "length"});
    c.mesh.n_cells = get_int(s, "mesh", "n_cells", c.mesh.n_cells);
    c.mesh.length = get_num(s, "mesh", "length", c.mesh.length);
  }
  require(c.mesh.n_cells >= 2 && c.mesh.n_cells <= 100000, "mesh.n_cells",
          "must lie in [2, 100000]");
  require(c.mesh.length > 0.0, "mesh.length", "must be positive");

  if (j.contains("problem")) {
    const json& s = j.at("problem");
    reject_unknown_keys(s, "problem", {"kind", "epsilon", "epsilon_grid"});
    c.problem.kind = get_str(s, "problem", "kind", c.problem.kind);
    c.problem.epsilon = get_num(s, "problem", "epsilon", c.problem.epsilon);
    if (s.contains("epsilon_grid")) {
      const json& g = s.at("epsilon_grid");
      require(g.is_array(), "problem.epsilon_grid", "must be an array");
      c.problem.epsilon_grid.clear();
      for (const auto& v : g) {
        require(v.is_number(), "problem.epsilon_grid",
                "entries must be numbers");
        c.problem.epsilon_grid.push_back(v.get<double>());
      }
    }
  }
  require(c.problem.kind == "R" || c.problem.kind == "A", "problem.kind",
          "must be \"R\" or \"A\"");
  require(c.problem.epsilon > 0.0 && c.problem.epsilon <= 1.0,
          "problem.epsilon", "must lie in (0, 1]");
  for (double e : c.problem.epsilon_grid) {
    require(e > 0.0 && e <= 1.0, "problem.epsilon_grid",
            "entries must lie in (0, 1]");
  }

  if (j.contains("nonlinearity")) {
    const json& s = j.at("nonlinearity");
    reject_unknown_keys(s, "nonlinearity", {"name", "lambda"});
    c.nonlinearity.name = get_str(s, "nonlinearity", "name",
                                  c.nonlinearity.name);
    c.nonlinearity.lambda = get_num(s, "nonlinearity", "lambda",
                                    c.nonlinearity.lambda);
  }
  require(c.nonlinearity.name == "zero" || c.nonlinearity.name == "cubic" ||
              c.nonlinearity.name == "cubic_minus_linear",
          "nonlinearity.name", "must be zero|cubic|cubic_minus_linear");
  if (c.nonlinearity.name == "cubic_minus_linear") {
    require(c.nonlinearity.lambda >= 0.0 && c.nonlinearity.lambda < 1.0,
            "nonlinearity.lambda", "must lie in [0, 1)");
  }

  if (j.contains("boundary")) {
    const json& s = j.at("boundary");
    reject_unknown_keys(s, "boundary", {"name", "rho"});
    c.boundary.name = get_str(s, "boundary", "name", c.boundary.name);
    c.boundary.rho = get_num(s, "boundary", "rho", c.boundary.rho);
  }
  require(c.boundary.name == "zero" || c.boundary.name == "bounded_sine",
          "boundary.name", "must be zero|bounded_sine");

  // Every experiment that advances trajectories must state its step size
  // explicitly; only the pure-linear-algebra kinds may omit the section.
  bool needs_time = c.experiment != "eigen" && c.experiment != "check";
  if (j.contains("time")) {
    const json& s = j.at("time");
    reject_unknown_keys(s, "time", {"horizon", "dt", "stride", "burn_in"});
    require(s.contains("dt") || !needs_time, "time.dt", "is required");
    c.time.horizon = get_num(s, "time", "horizon", c.time.horizon);
    c.time.dt = get_num(s, "time", "dt", c.time.dt);
    c.time.stride = get_int(s, "time", "stride", c.time.stride);
    c.time.burn_in = get_num(s, "time", "burn_in", c.time.burn_in);
  } else {
    require(!needs_time, "time", "section is required for this experiment");
  }
  require(c.time.horizon > 0.0, "time.horizon", "must be positive");
  require(c.time.dt > 0.0, "time.dt", "must be positive");
  require(c.time.stride >= 1, "time.stride", "must be >= 1");
  require(c.time.burn_in >= 0.0 && c.time.burn_in < c.time.horizon,
          "time.burn_in", "must lie in [0, horizon)");

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown_keys(s, "solver", {"tolerance", "max_iterations"});
    c.solver.tolerance = get_num(s, "solver", "tolerance", c.solver.tolerance);
    c.solver.max_iterations =
        get_int(s, "solver", "max_iterations", c.solver.max_iterations);
  }
  require(c.solver.tolerance > 0.0, "solver.tolerance", "must be positive");
  require(c.solver.max_iterations >= 1, "solver.max_iterations",
          "must be >= 1");

  if (j.contains("constants")) {
    const json& s = j.at("constants");
    reject_unknown_keys(s, "constants",
                        {"eta", "m0", "m1", "C1", "C2", "iota", "beta"});
    c.constants.eta = get_num(s, "constants", "eta", c.constants.eta);
    c.constants.m0 = get_num(s, "constants", "m0", c.constants.m0);
    c.constants.m1 = get_num(s, "constants", "m1", c.constants.m1);
    c.constants.c1 = get_num(s, "constants", "C1", c.constants.c1);
    c.constants.c2 = get_num(s, "constants", "C2", c.constants.c2);
    c.constants.iota = get_num(s, "constants", "iota", c.constants.iota);
    c.constants.beta = get_num(s, "constants", "beta", c.constants.beta);
  }
  require(c.constants.eta > 0.0, "constants.eta", "must be positive");
  require(c.constants.m0 > 0.0, "constants.m0", "must be positive");
  require(c.constants.m1 > 0.0, "constants.m1", "must be positive");
  require(c.constants.c1 > 0.0, "constants.C1", "must be positive");
  require(c.constants.iota > 0.0, "constants.iota", "must be positive");

  if (j.contains("initial")) {
    const json& s = j.at("initial");
    reject_unknown_keys(s, "initial",
                        {"kind", "count", "modes", "target_norm", "max_norm",
                         "pair_gap", "delta0", "delta1"});
    c.initial.kind = get_str(s, "initial", "kind", c.initial.kind);
    c.initial.count = get_int(s, "initial", "count", c.initial.count);
    c.initial.modes = get_int(s, "initial", "modes", c.initial.modes);
    c.initial.target_norm =
        get_num(s, "initial", "target_norm", c.initial.target_norm);
    c.initial.max_norm = get_num(s, "initial", "max_norm", c.initial.max_norm);
    c.initial.pair_gap = get_num(s, "initial", "pair_gap", c.initial.pair_gap);
    auto read_pair = [&](const char* key, std::array<double, 2>& dst) {
      if (!s.contains(key)) return;
      const json& v = s.at(key);
      require(v.is_array() && v.size() == 2,
              std::string("initial.") + key,
              "must be an array of two numbers");
      for (int b = 0; b < 2; ++b) {
        require(v[b].is_number(), std::string("initial.") + key,
                "must be an array of two numbers");
        dst[b] = v[b].get<double>();
      }
    };
    read_pair("delta0", c.initial.delta0);
    read_pair("delta1", c.initial.delta1);
  }
  require(c.initial.kind == "random_modes" ||
              c.initial.kind == "cosine_profile",
          "initial.kind", "must be random_modes|cosine_profile");
  require(c.initial.count >= 1, "initial.count", "must be >= 1");
  require(c.initial.modes >= 1 && c.initial.modes <= c.mesh.n_cells,
          "initial.modes", "must lie in [1, n_cells]");
  require(c.initial.target_norm > 0.0, "initial.target_norm",
          "must be positive");
  require(c.initial.max_norm > 0.0, "initial.max_norm", "must be positive");
  require(c.initial.pair_gap > 0.0, "initial.pair_gap", "must be positive");

  if (j.contains("output")) {
    const json& s = j.at("output");
    reject_unknown_keys(s, "output", {"directory", "snapshots"});
    c.output.directory = get_str(s, "output", "directory",
                                 c.output.directory);
    c.output.snapshots = get_bool(s, "output", "snapshots",
                                  c.output.snapshots);
  }
  require(!c.output.directory.empty(), "output.directory",
          "must be nonempty");

  if (j.contains("fit")) {
    const json& s = j.at("fit");
    reject_unknown_keys(s, "fit", {"window_start"});
    c.fit.window_start = get_num(s, "fit", "window_start",
                                 c.fit.window_start);
  }
  require(c.fit.window_start >= 0.0, "fit.window_start",
          "must be nonnegative");

  c.eigen_count = get_int(j, "<root>", "eigen_count", c.eigen_count);
  require(c.eigen_count >= 1 && c.eigen_count <= c.mesh.n_cells,
          "eigen_count", "must lie in [1, n_cells]");

  if (j.contains("seed")) {
    const json& v = j.at("seed");
    require(v.is_number_unsigned() || v.is_number_integer(), "seed",
            "must be a nonnegative integer");
    long long sv = v.get<long long>();
    require(sv >= 0, "seed", "must be a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(sv);
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
  return parse_config(j);
}

// Canonical serialization of the semantic fields (everything that can
// change the numbers; output paths excluded) for hashing.
inline std::string canonical_config_string(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = c.experiment;
  j["mesh"] = {{"n_cells", c.mesh.n_cells}, {"length", c.mesh.length}};
  j["problem"] = {{"kind", c.problem.kind},
                  {"epsilon", c.problem.epsilon},
                  {"epsilon_grid", c.problem.epsilon_grid}};
  j["nonlinearity"] = {{"name", c.nonlinearity.name},
                       {"lambda", c.nonlinearity.lambda}};
  j["boundary"] = {{"name", c.boundary.name}, {"rho", c.boundary.rho}};
  j["time"] = {{"horizon", c.time.horizon},
               {"dt", c.time.dt},
               {"stride", c.time.stride},
               {"burn_in", c.time.burn_in}};
  j["solver"] = {{"tolerance", c.solver.tolerance},
                 {"max_iterations", c.solver.max_iterations}};
  j["constants"] = {{"eta", c.constants.eta},   {"m0", c.constants.m0},
                    {"m1", c.constants.m1},     {"C1", c.constants.c1},
                    {"C2", c.constants.c2},     {"iota", c.constants.iota},
                    {"beta", c.constants.beta}};
  j["initial"] = {{"kind", c.initial.kind},
                  {"count", c.initial.count},
                  {"modes", c.initial.modes},
                  {"target_norm", c.initial.target_norm},
                  {"max_norm", c.initial.max_norm},
                  {"pair_gap", c.initial.pair_gap},
                  {"delta0", c.initial.delta0},
                  {"delta1", c.initial.delta1}};
  j["fit"] = {{"window_start", c.fit.window_start}};
  j["eigen_count"] = c.eigen_count;
  j["seed"] = c.seed;
  j["snapshots"] = c.output.snapshots;
  return j.dump();
}

// FNV-1a 64-bit over the canonical serialization, reported as 16 hex chars.
inline std::string config_hash(const ExperimentConfig& c) {
  std::string s = canonical_config_string(c);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wavedyn
