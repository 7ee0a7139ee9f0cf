#pragma once

// Exact solutions and initial data for the porous medium equation rho_t = Lap(rho^m).

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pme/error.hpp"
#include "pme/mesh.hpp"

namespace pme {

/// Similarity exponent of the d-dimensional Barenblatt profile, d/(d(m-1)+2).
inline double barenblatt_exponent(double m, int d) { return d / (d * (m - 1.0) + 2.0); }

/// Barenblatt solution shifted to start at t = 0:
///   (t+1)^{-k} ( s0 - k(m-1)/(2dm) |x|^2 / (t+1)^{2k/d} )_+^{1/(m-1)}.
inline double barenblatt(const Point& x, double t, double m, double s0, int d) {
  if (!(m > 1.0)) throw InvalidArgument("barenblatt: m must exceed 1");
  const double k = barenblatt_exponent(m, d);
  const double r2 = d == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1];
  const double tau = t + 1.0;
  const double base = s0 - k * (m - 1.0) / (2.0 * d * m) * r2 / std::pow(tau, 2.0 * k / d);
  if (base <= 0.0) return 0.0;
  return std::pow(tau, -k) * std::pow(base, 1.0 / (m - 1.0));
}

/// Right edge of the 1D Barenblatt support, sqrt(2 m s0 / (k(m-1))) (t+1)^k, k = 1/(m+1).
inline double front_position(double t, double m, double s0 = 1.0) {
  const double k = 1.0 / (m + 1.0);
  return std::sqrt(2.0 * m * s0 / (k * (m - 1.0))) * std::pow(t + 1.0, k);
}

/// Waiting-time initial profile, supported on [-pi/2, pi/2].
inline double waiting_time_profile(double x, double m, double theta) {
  // Grid nodes a few ulps off +-pi/2 count as on the interface.
  if (std::abs(x) >= 0.5 * std::numbers::pi - 1e-12) return 0.0;
  const double c2 = std::cos(x) * std::cos(x);
  const double base = (m - 1.0) / m * ((1.0 - theta) * c2 + theta * c2 * c2);
  return std::pow(std::max(base, 0.0), 1.0 / (m - 1.0));
}

/// Theoretical waiting time 1/(2(m+1)(1-theta)), valid for theta <= 1/4.
inline double t_star(double m, double theta) {
  if (theta < 0.0 || theta > 0.25) throw InvalidArgument("t_star: theta must lie in [0, 1/4]");
  return 1.0 / (2.0 * (m + 1.0) * (1.0 - theta));
}

inline double merging_gaussians(double x, double y) {
  return std::exp(-20.0 * ((x - 0.3) * (x - 0.3) + (y - 0.3) * (y - 0.3))) +
         std::exp(-20.0 * ((x + 0.3) * (x + 0.3) + (y + 0.3) * (y + 0.3)));
}

/// Horseshoe-shaped data: a partial annulus plus two half discs closing it.
inline double complex_support(double x, double y, double m) {
  const double p = 3.0 / (2.0 * (m - 1.0));
  const double q = 0.25 * 0.25;
  const double r = std::hypot(x, y);
  if (r >= 0.5 && r <= 1.0 && (x < 0.0 || y < 0.0)) return 25.0 * std::pow(std::max(q - (r - 0.75) * (r - 0.75), 0.0), p);
  if (x * x + (y - 0.75) * (y - 0.75) <= q && x >= 0.0)
    return 25.0 * std::pow(std::max(q - x * x - (y - 0.75) * (y - 0.75), 0.0), p);
  if ((x - 0.75) * (x - 0.75) + y * y <= q && y >= 0.0)
    return 25.0 * std::pow(std::max(q - (x - 0.75) * (x - 0.75) - y * y, 0.0), p);
  return 0.0;
}

/// A named test case: domain, initial data and, where known, the exact solution.
struct ProblemSpec {
  std::string name;
  int dim = 1;
  Box domain;
  double m = 2.0;
  std::function<double(const Point&)> initial;
  std::optional<std::function<double(const Point&, double)>> exact;
  /// Error regions used by convergence studies.
  std::optional<Box> inner_region;
  std::optional<Box> full_region;
  /// Location whose density is tracked over time (waiting-time runs).
  std::optional<double> tracked_point;
  std::optional<double> waiting_time;
};

struct ProblemParams {
  double s0 = 0.0;     // 0 selects the catalog default
  double theta = 0.0;  // waiting-time profile parameter
};

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"barenblatt1d", "barenblatt2d", "waiting", "gaussians", "horseshoe"};
  return names;
}

inline ProblemSpec make_problem(const std::string& name, double m, ProblemParams params = {}) {
  if (!(m > 1.0)) throw InvalidArgument("exponent m must exceed 1");
  ProblemSpec p;
  p.name = name;
  p.m = m;
  if (name == "barenblatt1d" || name == "barenblatt2d") {
    const int d = name == "barenblatt1d" ? 1 : 2;
    const double s0 = params.s0 > 0.0 ? params.s0 : (d == 1 ? 3.0 : 1.0);
    const double L = d == 1 ? 10.0 : 6.0;
    const double inner = L / 2.0;
    p.dim = d;
    p.domain = {{-L, -L}, {L, L}};
    p.initial = [=](const Point& x) { return barenblatt(x, 0.0, m, s0, d); };
    p.exact = [=](const Point& x, double t) { return barenblatt(x, t, m, s0, d); };
    p.inner_region = Box{{-inner, -inner}, {inner, inner}};
    p.full_region = p.domain;
  } else if (name == "waiting") {
    const double theta = params.theta;
    if (theta < 0.0 || theta > 1.0) throw InvalidArgument("waiting: theta must lie in [0, 1]");
    p.dim = 1;
    p.domain = {{-std::numbers::pi, 0.0}, {std::numbers::pi, 0.0}};
    p.initial = [=](const Point& x) { return waiting_time_profile(x[0], m, theta); };
    p.tracked_point = 0.5 * std::numbers::pi;
    if (theta <= 0.25) p.waiting_time = t_star(m, theta);
  } else if (name == "gaussians") {
    p.dim = 2;
    p.domain = {{-1.0, -1.0}, {1.0, 1.0}};
    p.initial = [](const Point& x) { return merging_gaussians(x[0], x[1]); };
  } else if (name == "horseshoe") {
    p.dim = 2;
    p.domain = {{-2.0, -2.0}, {2.0, 2.0}};
    p.initial = [=](const Point& x) { return complex_support(x[0], x[1], m); };
  } else {
    throw InvalidArgument("unknown problem '" + name + "'");
  }
  return p;
}

}  // namespace pme
