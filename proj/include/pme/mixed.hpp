#pragma once

// Lowest-order Raviart-Thomas / piecewise-constant scheme for
//   rho_t + div(rho u) = 0,  u = -grad mu,  mu = m/(m-1) rho^{m-1}
// with lumped velocity mass, upwind face densities taken from the previous
// step and u.n = 0 on the boundary.  Velocity and potential are eliminated
// per face, leaving a nonlinear system in the cell densities.

#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pme/assembly.hpp"
#include "pme/discretization.hpp"
#include "pme/error.hpp"

namespace pme {

struct MixedState {
  std::shared_ptr<const Discretization> disc;
  Vector rho;   // per cell
  Vector mu;    // per cell, m/(m-1) rho^{m-1}
  Vector flux;  // per face, normal velocity u.n_E
  double time = 0.0;
  double m = 2.0;
};

/// Potential closure mu(rho) = m/(m-1) max(rho, 0)^{m-1}.
inline double potential(double rho, double m) { return m / (m - 1.0) * std::pow(std::max(rho, 0.0), m - 1.0); }

/// d mu / d rho, with the argument floored so the value stays finite for m < 2.
inline double potential_derivative(double rho, double m) {
  if (m == 2.0) return rho >= 0.0 ? 2.0 : 0.0;
  const double r = std::max(rho, m < 2.0 ? 1e-12 : 0.0);
  return m * std::pow(r, m - 2.0);
}

/// Throws unless every interior face carries a strictly positive velocity weight.
inline void require_mixed_compatible(const Discretization& d) {
  if (!is_delaunay(d.geometry, /*strict=*/true))
    throw InvalidArgument("mixed scheme needs a strictly Delaunay mesh (every interior cotangent weight > 1e-12)");
}

/// Static condensation of the lumped velocity equation:
///   u_E = |E| (mu_{K1} - mu_{K2}) / W_E  on interior faces, 0 on the boundary.
inline Vector condense_velocity(const Mesh& mesh, const LumpedVector& weights, const Vector& mu) {
  Vector u = Vector::Zero(static_cast<Eigen::Index>(mesh.num_faces()));
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.boundary()) continue;
    if (!(weights[f] > 1e-12 * std::pow(face.measure, mesh.dim)))
      throw InvalidArgument("condense_velocity: vanishing velocity weight on interior face " + std::to_string(f));
    u[f] = face.measure * (mu[face.cells[0]] - mu[face.cells[1]]) / weights[f];
  }
  return u;
}

/// Index of the cell the flow leaves through face f: cells[0] when u_E >= 0.
inline int upwind_cell(const Face& face, double u_face) {
  return (u_face >= 0.0 || face.boundary()) ? face.cells[0] : face.cells[1];
}

inline double upwind_value(const Vector& rho_prev, const Face& face, double u_face) {
  return rho_prev[upwind_cell(face, u_face)];
}

inline MixedState init_mixed_state(std::shared_ptr<const Discretization> disc,
                                   const std::function<double(const Point&)>& rho0, double m) {
  if (!(m > 1.0)) throw InvalidArgument("exponent m must exceed 1");
  require_mixed_compatible(*disc);
  const auto& mesh = disc->mesh;
  MixedState s;
  s.m = m;
  s.rho.resize(static_cast<Eigen::Index>(mesh.num_cells()));
  s.mu.resize(s.rho.size());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const double r = rho0(mesh.barycenter[k]);
    if (!(r >= 0.0)) throw InvalidArgument("initial density is negative (or NaN) in cell " + std::to_string(k));
    s.rho[k] = r;
    s.mu[k] = potential(r, m);
  }
  s.flux = condense_velocity(mesh, disc->velocity_weights, s.mu);
  s.disc = std::move(disc);
  return s;
}

inline double total_mass(const MixedState& s) {
  double mass = 0.0;
  for (Eigen::Index k = 0; k < s.rho.size(); ++k) mass += s.disc->mesh.cell_volume[k] * s.rho[k];
  return mass;
}

/// sum_K |K| rho_K^m / (m - 1)
inline double physical_energy(const MixedState& s) {
  double e = 0.0;
  for (Eigen::Index k = 0; k < s.rho.size(); ++k)
    e += s.disc->mesh.cell_volume[k] * std::pow(std::max(s.rho[k], 0.0), s.m) / (s.m - 1.0);
  return e;
}

/// Per-cell balance  |K|(rho^n - rho^{n-1}) + dt sum_E rhohat_E (u_E n_E.n_K) |E|.
inline Vector local_balance(const MixedState& next, const MixedState& prev, double dt) {
  const auto& mesh = next.disc->mesh;
  Vector r(next.rho.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) r[k] = mesh.cell_volume[k] * (next.rho[k] - prev.rho[k]);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.boundary()) continue;
    const double q = dt * upwind_value(prev.rho, face, next.flux[f]) * next.flux[f] * face.measure;
    r[face.cells[0]] += q;
    r[face.cells[1]] -= q;
  }
  return r;
}

struct CflBound {
  std::vector<double> per_cell;  // +inf where a cell has no outflow
  double global = std::numeric_limits<double>::infinity();
};

/// Largest dt for which the upwind update keeps every cell non-negative given
/// the face velocities of the state: 1 / sum_{outflow E} |u.n_K| |E| / |K|.
inline CflBound cfl_max_dt(const MixedState& s) {
  const auto& mesh = s.disc->mesh;
  std::vector<double> out(mesh.num_cells(), 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.boundary() || s.flux[f] == 0.0) continue;
    const int k = upwind_cell(face, s.flux[f]);
    out[k] += std::abs(s.flux[f]) * face.measure;
  }
  CflBound b;
  b.per_cell.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    b.per_cell[k] = out[k] > 0.0 ? mesh.cell_volume[k] / out[k] : std::numeric_limits<double>::infinity();
    b.global = std::min(b.global, b.per_cell[k]);
  }
  return b;
}

/// Advances the mixed state by dt.
///
/// Semismooth Newton: upwind directions are frozen from the current iterate,
/// a Newton step is taken on the resulting smooth system and the directions
/// are recomputed.  Convergence requires the residual below tolerance with an
/// unchanged upwind pattern.  After max_iterations the update is damped by 1/2.
inline MixedState step_mixed(const MixedState& prev, double dt, const NewtonOptions& opts = {},
                             StepInfo* info = nullptr) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const auto& d = *prev.disc;
  const auto& mesh = d.mesh;
  const double m = prev.m;
  const auto nc = static_cast<Eigen::Index>(mesh.num_cells());
  const std::size_t nf = mesh.num_faces();

  std::vector<double> trans(nf, 0.0);  // |E|^2 / W_E
  for (std::size_t f = 0; f < nf; ++f)
    if (!mesh.faces[f].boundary()) trans[f] = mesh.faces[f].measure * mesh.faces[f].measure / d.velocity_weights[f];

  Vector rho = prev.rho;
  Vector mu(nc);
  std::vector<std::uint8_t> dir(nf, 1), last_dir;
  Vector resid(nc);

  auto evaluate = [&](const Vector& r) {
    for (Eigen::Index k = 0; k < nc; ++k) {
      mu[k] = potential(r[k], m);
      resid[k] = mesh.cell_volume[k] * (r[k] - prev.rho[k]);
    }
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& face = mesh.faces[f];
      if (face.boundary()) continue;
      const double grad = mu[face.cells[0]] - mu[face.cells[1]];
      dir[f] = grad >= 0.0;
      const double q = dt * prev.rho[face.cells[dir[f] ? 0 : 1]] * trans[f] * grad;
      resid[face.cells[0]] += q;
      resid[face.cells[1]] -= q;
    }
  };
  // A flip only matters if it changes the face flux by more than the tolerance.
  auto pattern_stable = [&]() {
    if (last_dir.empty()) return false;
    for (std::size_t f = 0; f < nf; ++f) {
      if (dir[f] == last_dir[f]) continue;
      const Face& face = mesh.faces[f];
      const double jump = std::abs(prev.rho[face.cells[0]] - prev.rho[face.cells[1]]);
      if (dt * jump * trans[f] * std::abs(mu[face.cells[0]] - mu[face.cells[1]]) > 0.01 * opts.tolerance) return false;
    }
    return true;
  };

  const int max_total = 4 * opts.max_iterations;
  double res = 0.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it <= max_total; ++it) {
    evaluate(rho);
    res = resid.lpNorm<Eigen::Infinity>();
    if (res <= opts.tolerance && (it == 0 || pattern_stable())) {
      if (info) *info = {it, res};
      MixedState next = prev;
      next.rho = rho;
      next.mu = mu;
      next.flux = condense_velocity(mesh, d.velocity_weights, mu);
      next.time = prev.time + dt;
      return next;
    }
    if (it == max_total) break;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nc) + 4 * nf);
    for (Eigen::Index k = 0; k < nc; ++k) trip.emplace_back(k, k, mesh.cell_volume[k]);
    for (std::size_t f = 0; f < nf; ++f) {
      const Face& face = mesh.faces[f];
      if (face.boundary()) continue;
      const int a = face.cells[0], b = face.cells[1];
      const double c = dt * prev.rho[dir[f] ? a : b] * trans[f];
      if (c == 0.0) continue;
      const double da = c * potential_derivative(rho[a], m);
      const double db = c * potential_derivative(rho[b], m);
      trip.emplace_back(a, a, da);
      trip.emplace_back(a, b, -db);
      trip.emplace_back(b, a, -da);
      trip.emplace_back(b, b, db);
    }
    Eigen::SparseMatrix<double> J(nc, nc);
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw SolverError("mixed Newton: singular Jacobian", res);
    const Vector delta = lu.solve(-resid);
    const double damping = it < opts.max_iterations ? 1.0 : 0.5;
    rho += damping * delta;
    last_dir = dir;
  }
  throw SolverError("mixed Newton did not converge (residual " + std::to_string(res) + ")", res);
}

}  // namespace pme
