#pragma once

// CSV and legacy VTK writers.

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pme/harness/convergence.hpp"
#include "pme/harness/simulation.hpp"

namespace pme::harness {

namespace detail {

inline void put_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << *v;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

inline void check_written(std::ostream& os, const std::string& path) {
  os.flush();
  if (!os) throw Error("write to '" + path + "' failed");
}

inline int vtk_cell_type(CellKind k) {
  switch (k) {
    case CellKind::interval: return 3;
    case CellKind::triangle: return 5;
    case CellKind::quad: return 9;
  }
  return 0;
}

}  // namespace detail

inline void write_timeseries_csv(std::ostream& os, const std::vector<TimeSeriesRecord>& records) {
  os << std::setprecision(17);
  os << "step,time,mass,energy,min_density,max_density,tracked_density,cfl_bound\n";
  for (const auto& r : records) {
    os << r.step << ',' << r.time << ',' << r.mass << ',' << r.energy << ',' << r.min_density << ','
       << r.max_density << ',';
    detail::put_optional(os, r.tracked_density);
    os << ',';
    detail::put_optional(os, r.cfl_bound);
    os << '\n';
  }
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << std::setprecision(17);
  os << "level,N,dt,error_inner,order_inner,error_full,order_full\n";
  for (const auto& r : rows) {
    os << r.level << ',' << r.N << ',' << r.dt << ',' << r.error_inner << ',';
    detail::put_optional(os, r.order_inner);
    os << ',' << r.error_full << ',';
    detail::put_optional(os, r.order_full);
    os << '\n';
  }
}

/// Log-density states also carry u, with inactive vertices written as `u_floor`.
inline void write_vtk(std::ostream& os, const SchemeState& state, const std::string& title = "pme", double u_floor = -50.0) {
  const Mesh& mesh = std::visit([](const auto& s) -> const Mesh& { return s.disc->mesh; }, state);
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& x : mesh.vertices) os << x[0] << ' ' << x[1] << " 0\n";
  const int npc = mesh.nodes_per_cell();
  os << "CELLS " << mesh.num_cells() << ' ' << mesh.num_cells() * (npc + 1) << '\n';
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    os << npc;
    for (int v : mesh.cell(k)) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) os << detail::vtk_cell_type(mesh.kind) << '\n';

  auto scalars = [&](const char* name, const Vector& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
  };
  if (const auto* ls = std::get_if<LogDensityState>(&state)) {
    os << "POINT_DATA " << mesh.num_vertices() << '\n';
    scalars("density", ls->density());
    Vector u = ls->u;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (!ls->active[i]) u[i] = u_floor;
    scalars("log_density", u);
  } else {
    const auto& ms = std::get<MixedState>(state);
    os << "CELL_DATA " << mesh.num_cells() << '\n';
    scalars("density", ms.rho);
    scalars("potential", ms.mu);
  }
}

inline void write_timeseries_csv(const std::string& path, const std::vector<TimeSeriesRecord>& records) {
  auto out = detail::open_output(path);
  write_timeseries_csv(out, records);
  detail::check_written(out, path);
}

inline void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  auto out = detail::open_output(path);
  write_convergence_csv(out, rows);
  detail::check_written(out, path);
}

inline void write_vtk(const std::string& path, const SchemeState& state, double u_floor = -50.0) {
  auto out = detail::open_output(path);
  write_vtk(out, state, "pme", u_floor);
  detail::check_written(out, path);
}

/// `<prefix>_<step, zero padded to 6>.vtk`
inline std::string vtk_path(const std::string& prefix, int step) {
  std::string s = std::to_string(step);
  return prefix + "_" + std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s + ".vtk";
}

}  // namespace pme::harness
