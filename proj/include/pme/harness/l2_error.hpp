#pragma once

#include <cmath>
#include <functional>

#include "pme/error.hpp"
#include "pme/logdensity.hpp"
#include "pme/mixed.hpp"
#include "pme/quadrature.hpp"

namespace pme::harness {

using ExactFunction = std::function<double(const Point&)>;

/// Closed-box membership of the cell barycenter (y ignored in 1D).
inline bool in_region(const Mesh& mesh, std::size_t k, const Box& region) {
  const Point& b = mesh.barycenter[k];
  if (b[0] < region.lo[0] || b[0] > region.hi[0]) return false;
  return mesh.dim == 1 || (b[1] >= region.lo[1] && b[1] <= region.hi[1]);
}

namespace detail {

template <class CellDensity>
double l2_error_impl(const Mesh& mesh, const ExactFunction& exact, const Box& region, CellDensity&& density_at) {
  double sum = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    if (!in_region(mesh, k, region)) continue;
    any = true;
    for (const auto& q : cell_quadrature(mesh, k)) {
      const double e = density_at(k, q) - exact(q.x);
      sum += q.weight * e * e;
    }
  }
  if (!any) throw InvalidArgument("l2_error: no cell barycenter lies in the region");
  return std::sqrt(sum);
}

}  // namespace detail

/// L2 error of exp(u_h), u_h the P1/Q1 interpolant of the nodal log-density.
/// Cells without active vertices carry density 0; inactive vertices of partially
/// active cells take the value `u_floor`.
inline double l2_error(const LogDensityState& s, const ExactFunction& exact, const Box& region, double u_floor = -50.0) {
  const Mesh& mesh = s.disc->mesh;
  return detail::l2_error_impl(mesh, exact, region, [&](std::size_t k, const QuadraturePoint& q) {
    auto c = mesh.cell(k);
    bool any_active = false;
    double u = 0.0;
    for (std::size_t l = 0; l < c.size(); ++l) {
      const bool a = s.active[c[l]] != 0;
      any_active |= a;
      u += q.shape[l] * (a ? s.u[c[l]] : u_floor);
    }
    return any_active ? std::exp(u) : 0.0;
  });
}

/// L2 error of the piecewise-constant density.
inline double l2_error(const MixedState& s, const ExactFunction& exact, const Box& region) {
  const Mesh& mesh = s.disc->mesh;
  return detail::l2_error_impl(mesh, exact, region, [&](std::size_t k, const QuadraturePoint&) { return s.rho[k]; });
}

}  // namespace pme::harness
