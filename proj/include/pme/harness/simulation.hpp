#pragma once

// Time-stepping driver shared by the CLI, the convergence study and the tests.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pme/discretization.hpp"
#include "pme/harness/config.hpp"
#include "pme/logdensity.hpp"
#include "pme/mesh_io.hpp"
#include "pme/mixed.hpp"
#include "pme/problems.hpp"

namespace pme::harness {

using SchemeState = std::variant<LogDensityState, MixedState>;

struct TimeSeriesRecord {
  int step = 0;
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;  // entropy (logdensity) or physical energy (mixed)
  double min_density = 0.0;
  double max_density = 0.0;
  std::optional<double> tracked_density;
  std::optional<double> cfl_bound;  // mixed only
};

/// Called after every accepted step with (previous, next, dt).
using StepObserver = std::function<void(const SchemeState&, const SchemeState&, double)>;

struct SimulationResult {
  SchemeState final_state;
  std::vector<TimeSeriesRecord> records;
  int tracked_index = -1;
};

inline ProblemSpec problem_for(const RunConfig& c) { return make_problem(c.problem, c.m, c.params); }

inline MeshKind default_mesh_kind(const RunConfig& c, const ProblemSpec& p) {
  if (c.mesh_kind) return *c.mesh_kind;
  if (p.dim == 1) return MeshKind::interval;
  if (p.name == "barenblatt2d") return MeshKind::quad;
  return c.scheme == Scheme::mixed ? MeshKind::acute_triangle : MeshKind::triangle;
}

inline int default_cells(const RunConfig& c, const ProblemSpec& p) {
  if (c.n > 0) return c.n;
  if (p.name == "barenblatt1d") return 100;
  if (p.name == "waiting") return 200;
  if (p.name == "barenblatt2d") return 32;
  return 39;
}

inline Mesh build_mesh(const RunConfig& c, const ProblemSpec& p) {
  if (!c.mesh_file.empty()) return read_mesh_file(c.mesh_file);
  const Box box = c.domain.value_or(p.domain);
  const int n = default_cells(c, p);
  const MeshKind kind = default_mesh_kind(c, p);
  if ((kind == MeshKind::interval) != (p.dim == 1))
    throw ConfigError("mesh kind '" + std::string(to_string(kind)) + "' does not match the problem dimension");
  return build_structured_mesh(kind, box, {n, c.ny > 0 ? c.ny : n});
}

inline SchemeState initial_state(const RunConfig& c, const ProblemSpec& p, std::shared_ptr<const Discretization> disc) {
  if (c.scheme == Scheme::logdensity) return init_log_state(std::move(disc), p.initial, c.m);
  return init_mixed_state(std::move(disc), p.initial, c.m);
}

/// Vertex (logdensity) or cell (mixed) whose density is followed in time: the
/// vertex nearest to the tracked point, or the nearest cell on its outer side.
inline int tracked_index(const SchemeState& s, const ProblemSpec& p) {
  if (!p.tracked_point) return -1;
  const double x = *p.tracked_point;
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  if (const auto* ls = std::get_if<LogDensityState>(&s)) {
    const auto& X = ls->disc->mesh.vertices;
    for (std::size_t i = 0; i < X.size(); ++i)
      if (std::abs(X[i][0] - x) < dist) dist = std::abs(X[i][0] - x), best = static_cast<int>(i);
  } else {
    const auto& mesh = std::get<MixedState>(s).disc->mesh;
    const double sgn = x >= 0.0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
      const double off = sgn * (mesh.barycenter[k][0] - x);
      if (off >= 0.0 && off < dist) dist = off, best = static_cast<int>(k);
    }
  }
  return best;
}

inline double tracked_density(const SchemeState& s, int index) {
  if (const auto* ls = std::get_if<LogDensityState>(&s)) return ls->active[index] ? std::exp(ls->u[index]) : 0.0;
  return std::get<MixedState>(s).rho[index];
}

inline double state_time(const SchemeState& s) {
  return std::visit([](const auto& st) { return st.time; }, s);
}

inline double state_mass(const SchemeState& s) {
  return std::visit([](const auto& st) { return total_mass(st); }, s);
}

inline double state_energy(const SchemeState& s) {
  if (const auto* ls = std::get_if<LogDensityState>(&s)) return entropy_energy(*ls);
  return physical_energy(std::get<MixedState>(s));
}

inline TimeSeriesRecord make_record(const SchemeState& s, int step, int tracked) {
  TimeSeriesRecord r;
  r.step = step;
  r.time = state_time(s);
  r.mass = state_mass(s);
  r.energy = state_energy(s);
  if (const auto* ls = std::get_if<LogDensityState>(&s)) {
    if (ls->active_count() > 0) {
      auto b = bounds(*ls);
      r.min_density = b.min;
      r.max_density = b.max;
    }
  } else {
    const auto& ms = std::get<MixedState>(s);
    r.min_density = ms.rho.minCoeff();
    r.max_density = ms.rho.maxCoeff();
    r.cfl_bound = cfl_max_dt(ms).global;
  }
  if (tracked >= 0) r.tracked_density = tracked_density(s, tracked);
  return r;
}

/// Advances one step of length dt.  With CFL auto-halving (mixed only), a step
/// whose post hoc CFL bound is violated is recomputed with half the step, at
/// most 20 times; the returned dt is the accepted one.
inline std::pair<SchemeState, double> advance(const RunConfig& c, const SchemeState& s, double dt) {
  if (const auto* ls = std::get_if<LogDensityState>(&s)) return {step_logdensity(*ls, dt, c.variant, c.newton), dt};
  const auto& ms = std::get<MixedState>(s);
  double h = dt;
  for (int halvings = 0;; ++halvings) {
    MixedState next = step_mixed(ms, h, c.newton);
    if (!c.cfl_auto_halve || halvings == 20 || cfl_max_dt(next).global >= h) return {std::move(next), h};
    h *= 0.5;
  }
}

/// Runs [0, T] with uniform steps (the last one shortened to land on T).
inline SimulationResult run_simulation(const RunConfig& c, const StepObserver& observer = {},
                                       const std::function<void(const SchemeState&, int)>& on_output = {}) {
  const ProblemSpec p = problem_for(c);
  auto disc = make_discretization(build_mesh(c, p));
  SimulationResult result{initial_state(c, p, disc), {}, -1};
  result.tracked_index = tracked_index(result.final_state, p);
  SchemeState& state = result.final_state;

  const double T = c.final_time;
  const double eps = 1e-10 * T;
  int step = 0;
  double t = 0.0;
  bool uniform = true;  // times are n*dt until a step is shortened
  if (on_output) on_output(state, 0);
  while (t < T - eps) {
    const double dt = std::min(c.dt, T - t);
    SchemeState next = state;
    double accepted = 0.0;
    try {
      std::tie(next, accepted) = advance(c, state, dt);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(step + 1) + ": " + e.what(), e.last_residual());
    }
    uniform = uniform && accepted == c.dt;
    t = uniform ? (step + 1) * c.dt : t + accepted;
    if (T - t <= eps) t = T;
    std::visit([&](auto& st) { st.time = t; }, next);
    ++step;
    if (observer) observer(state, next, accepted);
    state = std::move(next);
    const bool last = t >= T;
    if (step % c.record_every == 0 || last) result.records.push_back(make_record(state, step, result.tracked_index));
    if (on_output && ((c.vtk_every > 0 && step % c.vtk_every == 0) || last)) on_output(state, step);
  }
  return result;
}

}  // namespace pme::harness
