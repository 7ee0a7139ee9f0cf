#pragma once

// Conforming 1D/2D meshes and the geometric quantities both schemes consume:
// cell volumes, face normals, cotangent weights and vertex patches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pme/error.hpp"

namespace pme {

using Point = std::array<double, 2>;

enum class CellKind { interval, triangle, quad };

/// Generator choice for structured meshes.  `acute_triangle` uses offset rows
/// of isoceles triangles so that every interior edge has a strictly positive
/// cotangent weight.
enum class MeshKind { interval, triangle, acute_triangle, quad };

inline std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::interval: return "interval";
    case CellKind::triangle: return "triangle";
    case CellKind::quad: return "quad";
  }
  return "?";
}

inline CellKind parse_cell_kind(std::string_view s) {
  if (s == "interval") return CellKind::interval;
  if (s == "triangle") return CellKind::triangle;
  if (s == "quad") return CellKind::quad;
  throw InvalidArgument("unknown cell kind '" + std::string(s) + "'");
}

inline MeshKind parse_mesh_kind(std::string_view s) {
  if (s == "interval") return MeshKind::interval;
  if (s == "triangle") return MeshKind::triangle;
  if (s == "acute_triangle") return MeshKind::acute_triangle;
  if (s == "quad") return MeshKind::quad;
  throw InvalidArgument("unknown mesh kind '" + std::string(s) + "'");
}

inline std::string_view to_string(MeshKind k) {
  switch (k) {
    case MeshKind::interval: return "interval";
    case MeshKind::triangle: return "triangle";
    case MeshKind::acute_triangle: return "acute_triangle";
    case MeshKind::quad: return "quad";
  }
  return "?";
}

/// Codimension-one entity: a vertex in 1D, an edge in 2D.
struct Face {
  std::array<int, 2> vertices{-1, -1};  // second entry unused in 1D
  /// Incident cells; cells[1] == -1 on the boundary.
  std::array<int, 2> cells{-1, -1};
  /// Unit normal pointing from cells[0] to cells[1] (outward on the boundary).
  Point normal{0.0, 0.0};
  double measure = 0.0;  // 1 in 1D, edge length in 2D

  bool boundary() const noexcept { return cells[1] < 0; }
};

struct Mesh {
  int dim = 1;
  CellKind kind = CellKind::interval;
  std::vector<Point> vertices;
  /// Cell vertex indices, counter-clockwise in 2D; quads start at the lower-left corner.
  std::vector<std::array<int, 4>> cells;
  std::vector<Face> faces;
  /// Local face l of a triangle is opposite local vertex l.  Intervals: 0 = left, 1 = right.
  /// Quads: edge (l, l+1).
  std::vector<std::array<int, 4>> cell_faces;
  std::vector<double> cell_volume;
  std::vector<Point> barycenter;

  int nodes_per_cell() const noexcept {
    switch (kind) {
      case CellKind::interval: return 2;
      case CellKind::triangle: return 3;
      case CellKind::quad: return 4;
    }
    return 0;
  }
  int faces_per_cell() const noexcept { return nodes_per_cell(); }

  std::size_t num_vertices() const noexcept { return vertices.size(); }
  std::size_t num_cells() const noexcept { return cells.size(); }
  std::size_t num_faces() const noexcept { return faces.size(); }

  std::span<const int> cell(std::size_t k) const {
    return {cells[k].data(), static_cast<std::size_t>(nodes_per_cell())};
  }

  /// +1 when the face normal is the outward normal of cell k, -1 otherwise.
  double face_sign(std::size_t k, int local_face) const {
    return faces[cell_faces[k][local_face]].cells[0] == static_cast<int>(k) ? 1.0 : -1.0;
  }

  double total_volume() const {
    double v = 0.0;
    for (double c : cell_volume) v += c;
    return v;
  }
};

namespace detail {

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

inline std::pair<int, int> local_face_vertices(CellKind kind, int l) {
  switch (kind) {
    case CellKind::interval: return {l, -1};
    case CellKind::triangle: return {(l + 1) % 3, (l + 2) % 3};
    case CellKind::quad: return {l, (l + 1) % 4};
  }
  return {-1, -1};
}

inline void orient_cell(Mesh& mesh, std::size_t k) {
  auto& c = mesh.cells[k];
  const auto& X = mesh.vertices;
  switch (mesh.kind) {
    case CellKind::interval:
      if (X[c[0]][0] > X[c[1]][0]) std::swap(c[0], c[1]);
      break;
    case CellKind::triangle:
      if (signed_area(X[c[0]], X[c[1]], X[c[2]]) < 0.0) std::swap(c[1], c[2]);
      break;
    case CellKind::quad: {
      double a = signed_area(X[c[0]], X[c[1]], X[c[2]]) + signed_area(X[c[0]], X[c[2]], X[c[3]]);
      if (a < 0.0) std::swap(c[1], c[3]);
      int start = 0;
      for (int l = 1; l < 4; ++l) {
        const auto& p = X[c[l]];
        const auto& q = X[c[start]];
        if (p[0] + p[1] < q[0] + q[1]) start = l;
      }
      std::rotate(c.begin(), c.begin() + start, c.begin() + 4);
      break;
    }
  }
}

}  // namespace detail

/// Builds a mesh from raw vertices and cells: orients cells, derives faces,
/// normals and measures.  Throws InvalidArgument on degenerate or
/// non-conforming input.
inline Mesh make_mesh(int dim, CellKind kind, std::vector<Point> vertices,
                      std::vector<std::array<int, 4>> cells) {
  if (dim == 1 && kind != CellKind::interval) throw InvalidArgument("1D meshes must use interval cells");
  if (dim == 2 && kind == CellKind::interval) throw InvalidArgument("2D meshes need triangle or quad cells");
  if (dim != 1 && dim != 2) throw InvalidArgument("only 1D and 2D meshes are supported");
  if (cells.empty()) throw InvalidArgument("mesh has no cells");

  Mesh mesh;
  mesh.dim = dim;
  mesh.kind = kind;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  const int nv = mesh.nodes_per_cell();
  const auto& X = mesh.vertices;

  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    for (int l = 0; l < nv; ++l) {
      int v = mesh.cells[k][l];
      if (v < 0 || static_cast<std::size_t>(v) >= X.size())
        throw InvalidArgument("cell " + std::to_string(k) + " references a missing vertex");
    }
    for (int l = nv; l < 4; ++l) mesh.cells[k][l] = -1;
    detail::orient_cell(mesh, k);
  }

  mesh.cell_volume.resize(mesh.cells.size());
  mesh.barycenter.resize(mesh.cells.size());
  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    const auto& c = mesh.cells[k];
    double vol = 0.0;
    switch (kind) {
      case CellKind::interval: vol = X[c[1]][0] - X[c[0]][0]; break;
      case CellKind::triangle: vol = detail::signed_area(X[c[0]], X[c[1]], X[c[2]]); break;
      case CellKind::quad: {
        const double hx = X[c[1]][0] - X[c[0]][0];
        const double hy = X[c[3]][1] - X[c[0]][1];
        const bool axis_aligned = X[c[1]][1] == X[c[0]][1] && X[c[2]][0] == X[c[1]][0] &&
                                  X[c[3]][0] == X[c[0]][0] && X[c[2]][1] == X[c[3]][1];
        if (!axis_aligned) throw InvalidArgument("quad cell " + std::to_string(k) + " is not axis-aligned");
        vol = hx * hy;
        break;
      }
    }
    if (!(vol > 0.0)) throw InvalidArgument("cell " + std::to_string(k) + " has non-positive volume");
    mesh.cell_volume[k] = vol;
    Point b{0.0, 0.0};
    for (int l = 0; l < nv; ++l) {
      b[0] += X[c[l]][0];
      b[1] += X[c[l]][1];
    }
    mesh.barycenter[k] = {b[0] / nv, b[1] / nv};
  }

  // Faces keyed by sorted vertex pair (1D: the vertex itself).
  std::map<std::pair<int, int>, int> index;
  mesh.cell_faces.assign(mesh.cells.size(), {-1, -1, -1, -1});
  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    const auto& c = mesh.cells[k];
    for (int l = 0; l < nv; ++l) {
      auto [a, b] = detail::local_face_vertices(kind, l);
      int va = c[a];
      int vb = b >= 0 ? c[b] : -1;
      const std::pair<int, int> key = vb < 0 ? std::pair{va, -1} : std::pair{std::min(va, vb), std::max(va, vb)};
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(mesh.faces.size()));
      if (inserted) {
        Face f;
        f.vertices = {va, vb};
        f.cells = {static_cast<int>(k), -1};
        if (dim == 1) {
          f.measure = 1.0;
          f.normal = {l == 0 ? -1.0 : 1.0, 0.0};
        } else {
          const double dx = X[vb][0] - X[va][0];
          const double dy = X[vb][1] - X[va][1];
          f.measure = std::hypot(dx, dy);
          if (!(f.measure > 0.0)) throw InvalidArgument("zero-length edge in cell " + std::to_string(k));
          f.normal = {dy / f.measure, -dx / f.measure};
        }
        mesh.faces.push_back(f);
      } else {
        Face& f = mesh.faces[it->second];
        if (f.cells[1] >= 0) throw InvalidArgument("non-conforming mesh: face shared by more than two cells");
        f.cells[1] = static_cast<int>(k);
      }
      mesh.cell_faces[k][l] = it->second;
    }
  }
  return mesh;
}

/// Axis-aligned bounding box; the y-range is ignored in 1D.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};
};

/// Structured conforming mesh of `box`.  `counts` holds cells per axis.
inline Mesh build_structured_mesh(MeshKind kind, const Box& box, std::array<int, 2> counts) {
  const int nx = counts[0];
  const int ny = counts[1];
  if (nx < 1) throw InvalidArgument("cell count must be at least 1");
  if (!(box.hi[0] > box.lo[0])) throw InvalidArgument("degenerate box");
  if (kind == MeshKind::interval) {
    std::vector<Point> X(nx + 1);
    std::vector<std::array<int, 4>> C(nx);
    const double h = (box.hi[0] - box.lo[0]) / nx;
    for (int i = 0; i <= nx; ++i) X[i] = {i == nx ? box.hi[0] : box.lo[0] + i * h, 0.0};
    for (int i = 0; i < nx; ++i) C[i] = {i, i + 1, -1, -1};
    return make_mesh(1, CellKind::interval, std::move(X), std::move(C));
  }
  if (ny < 1) throw InvalidArgument("cell count must be at least 1");
  if (!(box.hi[1] > box.lo[1])) throw InvalidArgument("degenerate box");
  const double hx = (box.hi[0] - box.lo[0]) / nx;
  const double hy = (box.hi[1] - box.lo[1]) / ny;
  auto xc = [&](int i) { return i == nx ? box.hi[0] : box.lo[0] + i * hx; };
  auto yc = [&](int j) { return j == ny ? box.hi[1] : box.lo[1] + j * hy; };

  std::vector<Point> X;
  std::vector<std::array<int, 4>> C;
  if (kind == MeshKind::triangle || kind == MeshKind::quad) {
    X.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) X.push_back({xc(i), yc(j)});
    auto v = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int a = v(i, j), b = v(i + 1, j), c = v(i + 1, j + 1), d = v(i, j + 1);
        if (kind == MeshKind::quad) {
          C.push_back({a, b, c, d});
        } else if ((i + j) % 2 == 0) {  // union-jack: alternate the diagonal
          C.push_back({a, b, c, -1});
          C.push_back({a, c, d, -1});
        } else {
          C.push_back({a, b, d, -1});
          C.push_back({b, c, d, -1});
        }
      }
    }
    return make_mesh(2, kind == MeshKind::quad ? CellKind::quad : CellKind::triangle, std::move(X), std::move(C));
  }

  // acute_triangle: even rows carry nx+1 vertices, odd rows are shifted by
  // hx/2 and padded with the two boundary vertices.  Each strip between two
  // rows is triangulated by zipping the sorted vertex lists.
  std::vector<std::vector<int>> rows(ny + 1);
  for (int j = 0; j <= ny; ++j) {
    if (j % 2 == 0) {
      for (int i = 0; i <= nx; ++i) {
        rows[j].push_back(static_cast<int>(X.size()));
        X.push_back({xc(i), yc(j)});
      }
    } else {
      rows[j].push_back(static_cast<int>(X.size()));
      X.push_back({box.lo[0], yc(j)});
      for (int i = 0; i < nx; ++i) {
        rows[j].push_back(static_cast<int>(X.size()));
        X.push_back({box.lo[0] + (i + 0.5) * hx, yc(j)});
      }
      rows[j].push_back(static_cast<int>(X.size()));
      X.push_back({box.hi[0], yc(j)});
    }
  }
  for (int j = 0; j < ny; ++j) {
    const auto& lower = rows[j];
    const auto& upper = rows[j + 1];
    std::size_t a = 0, b = 0;
    while (a + 1 < lower.size() || b + 1 < upper.size()) {
      bool advance_lower;
      if (a + 1 >= lower.size()) advance_lower = false;
      else if (b + 1 >= upper.size()) advance_lower = true;
      else if (X[lower[a + 1]][0] != X[upper[b + 1]][0]) advance_lower = X[lower[a + 1]][0] < X[upper[b + 1]][0];
      else advance_lower = X[lower[a]][0] < X[upper[b]][0];  // both reach the right side: close the lagging row first
      if (advance_lower) {
        C.push_back({lower[a], lower[a + 1], upper[b], -1});
        ++a;
      } else {
        C.push_back({lower[a], upper[b + 1], upper[b], -1});
        ++b;
      }
    }
  }
  return make_mesh(2, CellKind::triangle, std::move(X), std::move(C));
}

inline Mesh build_structured_mesh(MeshKind kind, const Box& box, int n) {
  return build_structured_mesh(kind, box, {n, kind == MeshKind::interval ? 1 : n});
}

/// Per-face lumping weights shared by the two schemes.
///
/// Triangles: weight[c] = cot(theta)/2 with theta the angle opposite the face
/// in incident cell c.  Quads and intervals: weight[c] = |K|/2 (trapezoidal
/// lumping of the lowest-order Raviart-Thomas normal component).
struct EdgeGeometry {
  CellKind kind = CellKind::interval;
  std::vector<std::array<double, 2>> weight;  // per incident cell, 0 when absent
  std::vector<double> omega;                  // aggregate over incident cells
  std::vector<std::array<double, 2>> angle;   // triangles only, NaN otherwise
  std::vector<bool> boundary;
};

inline EdgeGeometry compute_edge_geometry(const Mesh& mesh) {
  EdgeGeometry g;
  g.kind = mesh.kind;
  const std::size_t nf = mesh.num_faces();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  g.weight.assign(nf, {0.0, 0.0});
  g.omega.assign(nf, 0.0);
  g.angle.assign(nf, {nan, nan});
  g.boundary.resize(nf);
  const auto& X = mesh.vertices;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    if (!(mesh.cell_volume[k] > 0.0)) throw InvalidArgument("degenerate cell " + std::to_string(k));
    for (int l = 0; l < mesh.faces_per_cell(); ++l) {
      const int f = mesh.cell_faces[k][l];
      const int slot = mesh.faces[f].cells[0] == static_cast<int>(k) ? 0 : 1;
      double w;
      if (mesh.kind == CellKind::triangle) {
        const auto& c = mesh.cells[k];
        const Point& p = X[c[l]];
        const Point& q = X[c[(l + 1) % 3]];
        const Point& r = X[c[(l + 2) % 3]];
        const double ux = q[0] - p[0], uy = q[1] - p[1];
        const double vx = r[0] - p[0], vy = r[1] - p[1];
        const double cosv = std::clamp((ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy)), -1.0, 1.0);
        const double theta = std::acos(cosv);
        g.angle[f][slot] = theta;
        // cot(theta) from the dot/cross products avoids tan() blowing up near pi/2.
        w = 0.5 * (ux * vx + uy * vy) / std::abs(ux * vy - uy * vx);
      } else {
        w = 0.5 * mesh.cell_volume[k];
      }
      g.weight[f][slot] = w;
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    g.omega[f] = g.weight[f][0] + g.weight[f][1];
    g.boundary[f] = mesh.faces[f].boundary();
  }
  return g;
}

/// Delaunay test through the cotangent weights.  Non-strict: every face has
/// omega >= -tolerance.  Strict: every interior face has omega > tolerance.
inline bool is_delaunay(const EdgeGeometry& geom, bool strict, double tolerance = 1e-12) {
  if (geom.kind != CellKind::triangle) return true;
  for (std::size_t f = 0; f < geom.omega.size(); ++f) {
    if (strict) {
      if (!geom.boundary[f] && !(geom.omega[f] > tolerance)) return false;
    } else if (geom.omega[f] < -tolerance) {
      return false;
    }
  }
  return true;
}

/// |S_i|: total volume of the cells touching vertex i.
inline std::vector<double> vertex_patch_volumes(const Mesh& mesh) {
  std::vector<double> s(mesh.num_vertices(), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k)
    for (int v : mesh.cell(k)) s[v] += mesh.cell_volume[k];
  return s;
}

}  // namespace pme
