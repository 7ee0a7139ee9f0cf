#pragma once

// Plain ASCII mesh format:
//   dim ncells nverts kind
//   <one vertex per line: dim coordinates>
//   <one cell per line: 0-based vertex indices>

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pme/error.hpp"
#include "pme/mesh.hpp"

namespace pme {

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.dim << ' ' << mesh.num_cells() << ' ' << mesh.num_vertices() << ' ' << to_string(mesh.kind) << '\n';
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices) {
    os << p[0];
    if (mesh.dim == 2) os << ' ' << p[1];
    os << '\n';
  }
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    auto c = mesh.cell(k);
    for (std::size_t l = 0; l < c.size(); ++l) os << (l ? " " : "") << c[l];
    os << '\n';
  }
}

inline Mesh read_mesh(std::istream& is) {
  int dim = 0;
  std::size_t ncells = 0, nverts = 0;
  std::string kind_name;
  if (!(is >> dim >> ncells >> nverts >> kind_name)) throw InvalidArgument("mesh file: malformed header");
  const CellKind kind = parse_cell_kind(kind_name);
  if (dim != 1 && dim != 2) throw InvalidArgument("mesh file: unsupported dimension " + std::to_string(dim));
  std::vector<Point> X(nverts, Point{0.0, 0.0});
  for (auto& p : X) {
    if (!(is >> p[0])) throw InvalidArgument("mesh file: truncated vertex list");
    if (dim == 2 && !(is >> p[1])) throw InvalidArgument("mesh file: truncated vertex list");
  }
  const int nv = kind == CellKind::interval ? 2 : kind == CellKind::triangle ? 3 : 4;
  std::vector<std::array<int, 4>> C(ncells, {-1, -1, -1, -1});
  for (auto& c : C)
    for (int l = 0; l < nv; ++l)
      if (!(is >> c[l])) throw InvalidArgument("mesh file: truncated cell list");
  return make_mesh(dim, kind, std::move(X), std::move(C));
}

inline Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

inline void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file '" + path + "'");
  write_mesh(out, mesh);
  if (!out) throw Error("I/O error writing '" + path + "'");
}

}  // namespace pme
