#pragma once

// Semi-implicit P1 scheme in the log-density variable u = log(rho):
//
//   M (exp(u^n) - exp(u^{n-1})) + dt A(u^{n-1}) u^n = 0,
//
// with M the lumped mass and A the stiffness for the coefficient m exp(m u^{n-1}).
// Each step minimises the strictly convex functional
//
//   F(u) = 1.M exp(u) - u.M exp(u^{n-1}) + dt/2 u.A u
//
// by Newton's method with backtracking.  Vertices whose density is exactly zero
// are carried as inactive and enter the solve once the diagonal of the Newton
// system exceeds the activation cutoff.

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

enum class StiffnessVariant { vertex, edge };

inline StiffnessVariant parse_stiffness_variant(std::string_view s) {
  if (s == "vertex") return StiffnessVariant::vertex;
  if (s == "edge") return StiffnessVariant::edge;
  throw InvalidArgument("unknown stiffness variant '" + std::string(s) + "'");
}

struct LogDensityState {
  std::shared_ptr<const Discretization> disc;
  Vector u;            // meaningful on active vertices only
  ActiveMask active;   // 0 encodes exp(u) == 0 exactly
  double time = 0.0;
  double m = 2.0;

  std::size_t size() const { return static_cast<std::size_t>(u.size()); }

  /// Nodal density exp(u), exactly 0 on inactive vertices.
  Vector density() const {
    Vector rho = Vector::Zero(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (active[i]) rho[i] = std::exp(u[i]);
    return rho;
  }

  /// Nodal u with inactive vertices replaced by `floor` (for output files).
  Vector log_values(double floor = -50.0) const {
    Vector out = u;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (!active[i]) out[i] = floor;
    return out;
  }

  std::size_t active_count() const {
    std::size_t n = 0;
    for (auto a : active) n += a != 0;
    return n;
  }
};

/// Nodal interpolation u_i = log(rho0(v_i)); vertices where rho0 vanishes start inactive.
inline LogDensityState init_log_state(std::shared_ptr<const Discretization> disc,
                                      const std::function<double(const Point&)>& rho0, double m) {
  if (!(m > 1.0)) throw InvalidArgument("exponent m must exceed 1");
  LogDensityState s;
  const auto& X = disc->mesh.vertices;
  s.u = Vector::Zero(static_cast<Eigen::Index>(X.size()));
  s.active.assign(X.size(), 0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = rho0(X[i]);
    if (!(r >= 0.0)) throw InvalidArgument("initial density is negative (or NaN) at vertex " + std::to_string(i));
    if (r > 0.0) {
      s.u[i] = std::log(r);
      s.active[i] = 1;
    }
  }
  s.disc = std::move(disc);
  s.m = m;
  return s;
}

/// Lumped total mass sum_i M_ii exp(u_i).
inline double total_mass(const LogDensityState& s) { return s.disc->vertex_mass.dot(s.density()); }

/// Discrete entropy  sum_i M_ii exp(u_i)(u_i - 1); inactive vertices contribute 0.
inline double entropy_energy(const LogDensityState& s) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < s.u.size(); ++i)
    if (s.active[i]) e += s.disc->vertex_mass[i] * std::exp(s.u[i]) * (s.u[i] - 1.0);
  return e;
}

struct DensityBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Extremes of exp(u) over the active vertices.
inline DensityBounds bounds(const LogDensityState& s) {
  DensityBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (Eigen::Index i = 0; i < s.u.size(); ++i) {
    if (!s.active[i]) continue;
    const double r = std::exp(s.u[i]);
    b.min = std::min(b.min, r);
    b.max = std::max(b.max, r);
    any = true;
  }
  if (!any) throw InvalidArgument("bounds of a state without active vertices");
  return b;
}

inline SparseSymMatrix assemble_log_stiffness(const LogDensityState& s, StiffnessVariant variant) {
  const auto& d = *s.disc;
  std::span<const double> u(s.u.data(), s.size());
  return variant == StiffnessVariant::edge ? stiffness_edge_based(d.mesh, d.geometry, u, s.m, s.active)
                                           : stiffness_vertex_quadrature(d.mesh, u, s.m, s.active);
}

/// Newton iterate: values plus the set of vertices taking part in the solve.
struct LogIterate {
  Vector u;
  ActiveMask active;
};

/// Everything fixed during one time step: the Newton map, the residual and
/// the convex functional whose minimiser is the new state.
class LogNewtonStep {
 public:
  LogNewtonStep(const LogDensityState& prev, double dt, StiffnessVariant variant, NewtonOptions opts)
      : mass_(prev.disc->vertex_mass),
        A_(assemble_log_stiffness(prev, variant)),
        rho_prev_(prev.density()),
        diagA_(A_.diagonal()),
        dt_(dt),
        opts_(opts) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  }

  const SparseSymMatrix& stiffness() const { return A_; }

  Vector density(const LogIterate& it) const {
    Vector rho = Vector::Zero(it.u.size());
    for (Eigen::Index i = 0; i < it.u.size(); ++i)
      if (it.active[i]) rho[i] = std::exp(it.u[i]);
    return rho;
  }

  /// Vertices whose Newton-system diagonal M_ii exp(u_i) + dt A_ii exceeds the cutoff.
  ActiveMask activation(const LogIterate& it) const {
    ActiveMask a(it.active.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double rho = it.active[i] ? std::exp(it.u[i]) : 0.0;
      a[i] = mass_[i] * rho + dt_ * diagA_[i] > opts_.cutoff;
    }
    return a;
  }

  /// Residual M(exp(u) - exp(u^{n-1})) + dt A u on active vertices (inactive columns dropped).
  Vector residual(const LogIterate& it) const {
    const Vector rho = density(it);
    Vector um = masked(it);
    Vector r = mass_.cwiseProduct(rho - rho_prev_) + dt_ * (A_ * um);
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (!it.active[i]) r[i] = 0.0;
    return r;
  }

  double residual_norm(const LogIterate& it) const { return residual(it).lpNorm<Eigen::Infinity>(); }

  /// Size of the residual that rounding alone produces at this iterate.
  double roundoff_floor(const LogIterate& it) const {
    const double rho = density(it).cwiseProduct(mass_).lpNorm<Eigen::Infinity>();
    const double flux = dt_ * diagA_.lpNorm<Eigen::Infinity>() * masked(it).lpNorm<Eigen::Infinity>();
    return 64.0 * std::numeric_limits<double>::epsilon() * (rho + mass_.cwiseProduct(rho_prev_).lpNorm<Eigen::Infinity>() + flux);
  }

  /// Converged: residual below tolerance (or rounding level), mass defect
  /// sum(r) negligible, and a stable activation set.
  bool converged(const LogIterate& it, double tolerance, double* res_out = nullptr) const {
    const Vector r = residual(it);
    const double res = r.lpNorm<Eigen::Infinity>();
    if (res_out) *res_out = res;
    const double floor = roundoff_floor(it);
    if (res > std::max(tolerance, floor)) return false;
    const double mass = mass_.dot(density(it));
    if (std::abs(r.sum()) > std::max(1e-12 * mass, 4.0 * floor)) return false;
    return activation(it) == it.active;
  }

  /// F restricted to the active vertices.
  double functional(const LogIterate& it) const {
    Vector um = masked(it);
    double f = 0.5 * dt_ * um.dot(A_ * um);
    for (Eigen::Index i = 0; i < um.size(); ++i)
      if (it.active[i]) f += mass_[i] * (std::exp(um[i]) - um[i] * rho_prev_[i]);
    return f;
  }

  /// Sum of the magnitudes of the terms of F: the scale of its rounding error.
  double functional_scale(const LogIterate& it) const {
    Vector um = masked(it);
    double f = 0.0;
    const auto& As = A_.storage();
    for (Eigen::Index j = 0; j < As.outerSize(); ++j)
      for (SparseSymMatrix::Storage::InnerIterator e(As, j); e; ++e) f += std::abs(um[e.row()] * e.value() * um[j]);
    f *= 0.5 * dt_;
    for (Eigen::Index i = 0; i < um.size(); ++i)
      if (it.active[i]) f += mass_[i] * (std::exp(um[i]) + std::abs(um[i] * rho_prev_[i]));
    return f;
  }

  /// One Newton update
  ///   (M D + dt A) u^{k+1} = M (D u^k - exp(u^k) + exp(u^{n-1})),  D = diag(exp(u^k)),
  /// on the activated vertices, followed by backtracking on F.
  LogIterate update(const LogIterate& it) const {
    const ActiveMask next_active = activation(it);
    std::vector<int> dofs;
    std::vector<int> local(next_active.size(), -1);
    for (std::size_t i = 0; i < next_active.size(); ++i)
      if (next_active[i]) {
        local[i] = static_cast<int>(dofs.size());
        dofs.push_back(static_cast<int>(i));
      }
    const auto n = static_cast<Eigen::Index>(dofs.size());
    if (n == 0) throw SolverError("log-density Newton: no active degrees of freedom");

    std::vector<Eigen::Triplet<double>> trip;
    const auto& As = A_.storage();
    for (Eigen::Index col = 0; col < As.outerSize(); ++col) {
      if (local[col] < 0) continue;
      for (SparseSymMatrix::Storage::InnerIterator e(As, col); e; ++e)
        if (local[e.row()] >= 0) trip.emplace_back(local[e.row()], local[col], dt_ * e.value());
    }
    SparseSymMatrix::Storage Ar(n, n);
    Ar.setFromTriplets(trip.begin(), trip.end());
    LumpedVector shift(n);
    Vector rhs(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int i = dofs[a];
      const double rho = it.active[i] ? std::exp(it.u[i]) : 0.0;
      const double du = it.active[i] ? rho * it.u[i] : 0.0;
      shift[a] = mass_[i] * rho;
      rhs[a] = mass_[i] * (du - rho + rho_prev_[i]);
    }
    const Vector x = spd_solve(SparseSymMatrix(std::move(Ar)), shift, rhs);

    // Base point of the line search: newly activated vertices sit at their
    // solved values, vertices dropping below the cutoff are released.
    LogIterate base{it.u, next_active};
    bool activated = false;
    Vector step = Vector::Zero(it.u.size());
    for (Eigen::Index a = 0; a < n; ++a) {
      const int i = dofs[a];
      if (it.active[i]) {
        step[i] = x[a] - it.u[i];
      } else {
        base.u[i] = x[a];
        activated = true;
      }
    }
    const double f0 = functional(base);
    const double slack = std::max(1e-14 * std::max(1.0, std::abs(f0)), 64.0 * std::numeric_limits<double>::epsilon() * functional_scale(base));
    double alpha = 1.0;
    for (int h = 0; h <= opts_.max_halvings; ++h, alpha *= 0.5) {
      LogIterate trial{base.u + alpha * step, next_active};
      const double f = functional(trial);
      if (std::isfinite(f) && f <= f0 + slack) return trial;
    }
    if (activated) return base;
    throw SolverError("log-density Newton: line search exhausted", residual_norm(it));
  }

 private:
  Vector masked(const LogIterate& it) const {
    Vector um = it.u;
    for (Eigen::Index i = 0; i < um.size(); ++i)
      if (!it.active[i]) um[i] = 0.0;
    return um;
  }

  LumpedVector mass_;
  SparseSymMatrix A_;
  Vector rho_prev_;
  Vector diagA_;
  double dt_;
  NewtonOptions opts_;
};

/// Advances the state by dt.  Throws SolverError if Newton does not reach the
/// residual tolerance within the iteration budget.
inline LogDensityState step_logdensity(const LogDensityState& prev, double dt, StiffnessVariant variant,
                                       const NewtonOptions& opts = {}, StepInfo* info = nullptr) {
  LogNewtonStep newton(prev, dt, variant, opts);
  LogIterate it{prev.u, prev.active};
  double res = 0.0;
  for (int k = 0; k <= opts.max_iterations; ++k) {
    if (newton.converged(it, opts.tolerance, &res)) {
      if (info) *info = {k, res};
      LogDensityState next = prev;
      next.u = std::move(it.u);
      next.active = std::move(it.active);
      next.time = prev.time + dt;
      return next;
    }
    if (k == opts.max_iterations) break;
    it = newton.update(it);
  }
  throw SolverError("log-density Newton did not converge (residual " + std::to_string(res) + ")", res);
}

}  // namespace pme
