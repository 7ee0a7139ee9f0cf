#pragma once

#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <vector>

#include "pme/harness/l2_error.hpp"
#include "pme/harness/simulation.hpp"

namespace pme::harness {

struct ConvergenceRow {
  int level = 0;
  int N = 0;  // cells per axis
  double dt = 0.0;
  double error_inner = 0.0;
  std::optional<double> order_inner;
  double error_full = 0.0;
  std::optional<double> order_full;
};

/// order_l = log(e_{l-1}/e_l) / log(ratio); none for the first level.  A zero
/// error is reported as an exact (infinite) order.
inline std::vector<std::optional<double>> convergence_order(const std::vector<double>& errors, double ratio = 2.0) {
  if (!(ratio > 1.0)) throw InvalidArgument("refinement ratio must exceed 1");
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t l = 1; l < errors.size(); ++l) {
    if (errors[l] < 0.0 || errors[l - 1] < 0.0) throw InvalidArgument("errors must be non-negative");
    if (errors[l] == 0.0) out[l] = std::numeric_limits<double>::infinity();
    else if (errors[l - 1] == 0.0) out[l] = -std::numeric_limits<double>::infinity();
    else out[l] = std::log(errors[l - 1] / errors[l]) / std::log(ratio);
  }
  return out;
}

/// Config of refinement level l: cells doubled per level, dt divided by 4
/// (logdensity) or 2 (mixed).
inline RunConfig level_config(const RunConfig& base, int level) {
  const ProblemSpec p = problem_for(base);
  RunConfig c = base;
  c.n = default_cells(base, p) << level;
  if (base.ny > 0) c.ny = base.ny << level;
  const double factor = base.scheme == Scheme::logdensity ? 4.0 : 2.0;
  c.dt = base.dt / std::pow(factor, level);
  c.timeseries_csv.clear();
  c.vtk_prefix.clear();
  return c;
}

struct LevelErrors {
  double inner = 0.0;
  double full = 0.0;
};

inline ProblemSpec require_exact(const RunConfig& c) {
  ProblemSpec p = problem_for(c);
  if (!p.exact || !p.inner_region || !p.full_region)
    throw ConfigError("problem '" + c.problem + "' has no exact solution for a convergence study");
  return p;
}

inline LevelErrors final_errors(const RunConfig& c, const SchemeState& state) {
  const ProblemSpec p = require_exact(c);
  const double t = state_time(state);
  ExactFunction exact = [&](const Point& x) { return (*p.exact)(x, t); };
  const Box full = c.domain.value_or(*p.full_region);
  if (const auto* ls = std::get_if<LogDensityState>(&state))
    return {l2_error(*ls, exact, *p.inner_region, c.u_floor), l2_error(*ls, exact, full, c.u_floor)};
  const auto& ms = std::get<MixedState>(state);
  return {l2_error(ms, exact, *p.inner_region), l2_error(ms, exact, full)};
}

/// Runs config.levels refinement levels as independent jobs.
inline std::vector<ConvergenceRow> run_convergence(const RunConfig& base) {
  if (base.levels < 2) throw ConfigError("a convergence study needs at least 2 levels");
  require_exact(base);
  std::vector<std::future<LevelErrors>> jobs;
  std::vector<ConvergenceRow> rows(base.levels);
  for (int l = 0; l < base.levels; ++l) {
    const RunConfig c = level_config(base, l);
    rows[l].level = l;
    rows[l].N = c.n;
    rows[l].dt = c.dt;
    jobs.push_back(std::async(std::launch::async, [c] { return final_errors(c, run_simulation(c).final_state); }));
  }
  std::vector<double> inner, full;
  for (int l = 0; l < base.levels; ++l) {
    const LevelErrors e = jobs[l].get();
    rows[l].error_inner = e.inner;
    rows[l].error_full = e.full;
    inner.push_back(e.inner);
    full.push_back(e.full);
  }
  const auto oi = convergence_order(inner);
  const auto of = convergence_order(full);
  for (int l = 0; l < base.levels; ++l) {
    rows[l].order_inner = oi[l];
    rows[l].order_full = of[l];
  }
  return rows;
}

}  // namespace pme::harness
