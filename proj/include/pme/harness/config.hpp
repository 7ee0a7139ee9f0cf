#pragma once

// Run configuration read from `key = value` files ('#' starts a comment).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pme/discretization.hpp"
#include "pme/error.hpp"
#include "pme/logdensity.hpp"
#include "pme/mesh.hpp"
#include "pme/problems.hpp"

namespace pme::harness {

enum class Scheme { logdensity, mixed };

inline std::string_view to_string(Scheme s) { return s == Scheme::logdensity ? "logdensity" : "mixed"; }

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct RunConfig {
  Scheme scheme = Scheme::logdensity;
  std::string problem;
  double m = 2.0;
  double dt = 0.0;
  double final_time = 0.0;

  std::optional<Box> domain;           // problem default when empty
  std::optional<MeshKind> mesh_kind;   // problem/scheme default when empty
  std::string mesh_file;               // overrides the structured mesh when set
  int n = 0;                           // cells per axis; 0 selects the default
  int ny = 0;                          // 0: same as n

  StiffnessVariant variant = StiffnessVariant::vertex;
  NewtonOptions newton;
  bool cfl_auto_halve = false;
  ProblemParams params;
  int quadrature_degree = 4;
  double u_floor = -50.0;

  int levels = 4;  // convergence studies
  std::string timeseries_csv;
  std::string convergence_csv;
  std::string vtk_prefix;
  int vtk_every = 0;     // 0: final state only
  int record_every = 1;
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("invalid integer for '" + key + "': '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + v + "'");
}

/// "a,b" (1D) or "a,b,c,d" = xmin,xmax,ymin,ymax.
inline Box to_box(const std::string& key, const std::string& v) {
  std::vector<double> xs;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) xs.push_back(to_double(key, trim(item)));
  if (xs.size() == 2) return {{xs[0], 0.0}, {xs[1], 0.0}};
  if (xs.size() == 4) return {{xs[0], xs[2]}, {xs[1], xs[3]}};
  throw ConfigError("'" + key + "' expects xmin,xmax or xmin,xmax,ymin,ymax");
}

}  // namespace detail

/// Accumulates key/value pairs from files and overrides, then validates.
class ConfigBuilder {
 public:
  void read(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (detail::trim(line).empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
      set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
  }

  void read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    read(in);
  }

  /// Applies "key=value".
  void override_with(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigError("empty key");
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    if (it != entries_.end()) it->second = value;
    else entries_.emplace_back(key, value);
  }

  RunConfig build() const {
    RunConfig c;
    std::set<std::string> seen;
    for (const auto& [key, v] : entries_) {
      seen.insert(key);
      if (key == "scheme") {
        if (v == "logdensity") c.scheme = Scheme::logdensity;
        else if (v == "mixed") c.scheme = Scheme::mixed;
        else throw ConfigError("scheme must be 'logdensity' or 'mixed', got '" + v + "'");
      } else if (key == "problem") {
        c.problem = v;
      } else if (key == "m") {
        c.m = detail::to_double(key, v);
      } else if (key == "dt") {
        c.dt = detail::to_double(key, v);
      } else if (key == "T" || key == "final_time") {
        c.final_time = detail::to_double(key, v);
        seen.insert("T");
      } else if (key == "domain") {
        c.domain = detail::to_box(key, v);
      } else if (key == "mesh") {
        try {
          c.mesh_kind = parse_mesh_kind(v);
        } catch (const InvalidArgument& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "mesh_file") {
        c.mesh_file = v;
      } else if (key == "n") {
        c.n = detail::to_int(key, v);
      } else if (key == "ny") {
        c.ny = detail::to_int(key, v);
      } else if (key == "variant") {
        try {
          c.variant = parse_stiffness_variant(v);
        } catch (const InvalidArgument& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "newton_tol") {
        c.newton.tolerance = detail::to_double(key, v);
      } else if (key == "newton_max_iter") {
        c.newton.max_iterations = detail::to_int(key, v);
      } else if (key == "line_search_max") {
        c.newton.max_halvings = detail::to_int(key, v);
      } else if (key == "cutoff") {
        c.newton.cutoff = detail::to_double(key, v);
      } else if (key == "cfl_auto_halve") {
        c.cfl_auto_halve = detail::to_bool(key, v);
      } else if (key == "s0") {
        c.params.s0 = detail::to_double(key, v);
      } else if (key == "theta") {
        c.params.theta = detail::to_double(key, v);
      } else if (key == "quadrature_degree") {
        c.quadrature_degree = detail::to_int(key, v);
      } else if (key == "u_floor") {
        c.u_floor = detail::to_double(key, v);
      } else if (key == "levels") {
        c.levels = detail::to_int(key, v);
      } else if (key == "timeseries_csv") {
        c.timeseries_csv = v;
      } else if (key == "convergence_csv") {
        c.convergence_csv = v;
      } else if (key == "vtk_prefix") {
        c.vtk_prefix = v;
      } else if (key == "vtk_every") {
        c.vtk_every = detail::to_int(key, v);
      } else if (key == "record_every") {
        c.record_every = detail::to_int(key, v);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    }
    for (const char* required : {"scheme", "problem", "m", "dt", "T"})
      if (!seen.count(required)) throw ConfigError(std::string("missing required key '") + required + "'");
    if (c.scheme == Scheme::mixed && seen.count("variant"))
      throw ConfigError("'variant' applies to the logdensity scheme only");
    if (c.scheme == Scheme::logdensity && seen.count("cfl_auto_halve"))
      throw ConfigError("'cfl_auto_halve' applies to the mixed scheme only");
    validate(c);
    return c;
  }

  static void validate(const RunConfig& c) {
    if (!(c.m > 1.0)) throw ConfigError("m must exceed 1 (the linear heat equation is not supported)");
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(c.final_time >= c.dt)) throw ConfigError("final time must be at least dt");
    if (std::find(problem_names().begin(), problem_names().end(), c.problem) == problem_names().end())
      throw ConfigError("unknown problem '" + c.problem + "'");
    if (c.n < 0 || c.ny < 0) throw ConfigError("cell counts must be positive");
    if (c.quadrature_degree != 4) throw ConfigError("only the degree-4 error quadrature is available");
    if (c.levels < 1) throw ConfigError("levels must be at least 1");
    if (c.record_every < 1) throw ConfigError("record_every must be at least 1");
    if (c.vtk_every < 0) throw ConfigError("vtk_every must be non-negative");
    if (!(c.newton.tolerance > 0.0) || c.newton.max_iterations < 1 || c.newton.max_halvings < 0 || !(c.newton.cutoff >= 0.0))
      throw ConfigError("invalid Newton settings");
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {}) {
  ConfigBuilder b;
  b.read(in);
  for (const auto& o : overrides) b.override_with(o);
  return b.build();
}

inline RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
  ConfigBuilder b;
  b.read_file(path);
  for (const auto& o : overrides) b.override_with(o);
  return b.build();
}

}  // namespace pme::harness
