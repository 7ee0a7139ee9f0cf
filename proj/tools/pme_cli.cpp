// Command-line driver: simulate, converge, mesh-info.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pme/pme.hpp"

namespace {

using namespace pme;
using namespace pme::harness;

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  // Convenience flags; each maps to the config key of the same name.
  std::string scheme, problem, mesh, variant, output;
  std::optional<double> m, dt, T;
  std::optional<int> n, levels;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("config", a.config, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", a.overrides, "Override a config key, key=value (repeatable)");
  cmd->add_option("--scheme", a.scheme, "logdensity | mixed");
  cmd->add_option("--problem", a.problem, "Problem name");
  cmd->add_option("--mesh", a.mesh, "interval | triangle | acute_triangle | quad");
  cmd->add_option("--variant", a.variant, "Stiffness variant (logdensity): vertex | edge");
  cmd->add_option("-m", a.m, "PME exponent");
  cmd->add_option("--dt", a.dt, "Time step (base step for converge)");
  cmd->add_option("-T,--final-time", a.T, "Final time");
  cmd->add_option("-n,--cells", a.n, "Cells per axis (base level for converge)");
  cmd->add_option("--levels", a.levels, "Refinement levels (converge)");
  cmd->add_option("-o,--output", a.output, "CSV output path");
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

RunConfig load(const CommonArgs& a, const char* csv_key) {
  ConfigBuilder b;
  b.read_file(a.config);
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) b.set(key, v);
  };
  put("scheme", a.scheme);
  put("problem", a.problem);
  put("mesh", a.mesh);
  put("variant", a.variant);
  put(csv_key, a.output);
  if (a.m) b.set("m", num(*a.m));
  if (a.dt) b.set("dt", num(*a.dt));
  if (a.T) b.set("T", num(*a.T));
  if (a.n) b.set("n", std::to_string(*a.n));
  if (a.levels) b.set("levels", std::to_string(*a.levels));
  for (const auto& o : a.overrides) b.override_with(o);
  return b.build();
}

int simulate(const CommonArgs& a) {
  const RunConfig c = load(a, "timeseries_csv");
  auto on_output = [&](const SchemeState& s, int step) {
    if (!c.vtk_prefix.empty()) write_vtk(vtk_path(c.vtk_prefix, step), s, c.u_floor);
  };
  const SimulationResult r = run_simulation(c, {}, on_output);
  if (!c.timeseries_csv.empty()) write_timeseries_csv(c.timeseries_csv, r.records);
  else write_timeseries_csv(std::cout, r.records);
  if (!r.records.empty()) {
    const auto& last = r.records.back();
    std::cerr << std::setprecision(10) << "steps " << last.step << "  t " << last.time << "  mass " << last.mass
              << "  energy " << last.energy << "  density [" << last.min_density << ", " << last.max_density << "]\n";
  }
  return 0;
}

int converge(const CommonArgs& a) {
  const RunConfig c = load(a, "convergence_csv");
  const auto rows = run_convergence(c);
  if (!c.convergence_csv.empty()) write_convergence_csv(c.convergence_csv, rows);
  else write_convergence_csv(std::cout, rows);
  return 0;
}

int mesh_info(const std::string& path, bool delaunay_only) {
  const Mesh mesh = read_mesh_file(path);
  const EdgeGeometry geom = compute_edge_geometry(mesh);
  const bool strict = is_delaunay(geom, true);
  const bool weak = is_delaunay(geom, false);
  if (delaunay_only) {
    std::cout << (strict ? "strict" : weak ? "weak" : "no") << '\n';
    return 0;
  }
  double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  std::size_t boundary = 0;
  for (const auto& f : mesh.faces) {
    if (f.boundary()) ++boundary;
    if (mesh.dim == 2) hmin = std::min(hmin, f.measure), hmax = std::max(hmax, f.measure);
  }
  if (mesh.dim == 1)
    for (double v : mesh.cell_volume) hmin = std::min(hmin, v), hmax = std::max(hmax, v);
  std::cout << std::setprecision(10) << "dim            " << mesh.dim << '\n'
            << "cell kind      " << to_string(mesh.kind) << '\n'
            << "vertices       " << mesh.num_vertices() << '\n'
            << "cells          " << mesh.num_cells() << '\n'
            << "faces          " << mesh.num_faces() << " (" << boundary << " boundary)\n"
            << "volume         " << mesh.total_volume() << '\n'
            << "h              [" << hmin << ", " << hmax << "]\n"
            << "delaunay       " << (strict ? "strict" : weak ? "weak" : "no") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving finite element solvers for the porous medium equation"};
  app.require_subcommand(1);

  CommonArgs sim_args, conv_args;
  auto* sim = app.add_subcommand("simulate", "Run one simulation and write the time series");
  add_common(sim, sim_args);
  auto* conv = app.add_subcommand("converge", "Run a space-time refinement study");
  add_common(conv, conv_args);

  std::string mesh_path;
  bool delaunay_only = false;
  auto* info = app.add_subcommand("mesh-info", "Summarise a mesh file");
  info->add_option("meshfile", mesh_path, "Mesh file")->required()->check(CLI::ExistingFile);
  info->add_flag("--delaunay", delaunay_only, "Print only the Delaunay classification");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(sim_args);
    if (*conv) return converge(conv_args);
    return mesh_info(mesh_path, delaunay_only);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
