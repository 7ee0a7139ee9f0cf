#pragma once

#include <memory>

#include "pme/assembly.hpp"
#include "pme/mesh.hpp"

namespace pme {

/// Immutable bundle of a mesh and everything derived from it once.
struct Discretization {
  Mesh mesh;
  EdgeGeometry geometry;
  LumpedVector vertex_mass;       // lumped P1 (or Q1) mass
  LumpedVector velocity_weights;  // lumped RT0 velocity mass, per face
};

inline std::shared_ptr<const Discretization> make_discretization(Mesh mesh) {
  auto d = std::make_shared<Discretization>();
  d->mesh = std::move(mesh);
  d->geometry = compute_edge_geometry(d->mesh);
  d->vertex_mass = lumped_mass(d->mesh);
  d->velocity_weights = velocity_lumped_weights(d->mesh, d->geometry);
  return d;
}

/// Newton controls shared by both schemes.  `tolerance` bounds the residual
/// infinity norm in lumped-mass units.
struct NewtonOptions {
  double tolerance = 1e-11;
  int max_iterations = 50;
  int max_halvings = 50;
  double cutoff = 1e-14;  // log-density DOF activation threshold on the system diagonal
};

/// Convergence report of a single time step.
struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
};

}  // namespace pme
