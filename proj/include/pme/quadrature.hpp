#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "pme/mesh.hpp"

namespace pme {

/// Physical quadrature point; `shape` holds the nodal basis values there.
struct QuadraturePoint {
  Point x;
  double weight;                 // already scaled by |K|
  std::array<double, 4> shape;   // nodal basis values at x
};

namespace detail {

struct RefRule {
  std::vector<std::array<double, 3>> points;  // barycentric (triangle), (s, t, -) otherwise
  std::vector<double> weights;                // sum to 1
};

inline const RefRule& gauss3_1d() {
  static const RefRule r = [] {
    const double a = 0.5 * std::sqrt(3.0 / 5.0);
    return RefRule{{{0.5 - a, 0, 0}, {0.5, 0, 0}, {0.5 + a, 0, 0}}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return r;
}

// Symmetric 6-point rule, exact for polynomials of degree 4.
inline const RefRule& triangle_deg4() {
  static const RefRule r = [] {
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    return RefRule{{{a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1}, {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}},
                   {w1, w1, w1, w2, w2, w2}};
  }();
  return r;
}

}  // namespace detail

/// Degree-4-exact quadrature on cell k: 3-point Gauss on intervals, the
/// 6-point symmetric rule on triangles, 3x3 Gauss on quads.
inline std::vector<QuadraturePoint> cell_quadrature(const Mesh& mesh, std::size_t k) {
  const auto& c = mesh.cells[k];
  const auto& X = mesh.vertices;
  const double vol = mesh.cell_volume[k];
  std::vector<QuadraturePoint> out;
  switch (mesh.kind) {
    case CellKind::interval: {
      const auto& r = detail::gauss3_1d();
      for (std::size_t q = 0; q < r.weights.size(); ++q) {
        const double s = r.points[q][0];
        out.push_back({{(1 - s) * X[c[0]][0] + s * X[c[1]][0], 0.0}, r.weights[q] * vol, {1 - s, s, 0, 0}});
      }
      break;
    }
    case CellKind::triangle: {
      const auto& r = detail::triangle_deg4();
      for (std::size_t q = 0; q < r.weights.size(); ++q) {
        const auto& l = r.points[q];
        Point x{0, 0};
        for (int i = 0; i < 3; ++i) {
          x[0] += l[i] * X[c[i]][0];
          x[1] += l[i] * X[c[i]][1];
        }
        out.push_back({x, r.weights[q] * vol, {l[0], l[1], l[2], 0}});
      }
      break;
    }
    case CellKind::quad: {
      const auto& r = detail::gauss3_1d();
      const double hx = X[c[1]][0] - X[c[0]][0];
      const double hy = X[c[3]][1] - X[c[0]][1];
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          const double s = r.points[i][0], t = r.points[j][0];
          out.push_back({{X[c[0]][0] + s * hx, X[c[0]][1] + t * hy},
                         r.weights[i] * r.weights[j] * vol,
                         {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t}});
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace pme
