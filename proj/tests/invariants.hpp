#pragma once

// Structural invariants checked step by step, shared by the property tests and
// the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pme/pme.hpp"

namespace invariants {

using pme::harness::SchemeState;

struct Tolerances {
  double mass_rel = 1e-9;
  double energy_slack = 1e-10;  // relative to max(1, |E|)
  double bound_slack = 1e-9;    // relative to max(1, max density)
  double positivity = -1e-12;
};

/// Step observer recording the first violated invariant.
class Checker {
 public:
  explicit Checker(bool check_bounds = false, Tolerances tol = {}) : bounds_(check_bounds), tol_(tol) {}

  void operator()(const SchemeState& prev, const SchemeState& next, double dt) {
    ++steps_;
    if (steps_ == 1) mass0_ = pme::harness::state_mass(prev);
    const double mass = pme::harness::state_mass(next);
    if (std::abs(mass - mass0_) > tol_.mass_rel * std::abs(mass0_)) fail("mass drift " + str(mass / mass0_ - 1));
    const double e0 = pme::harness::state_energy(prev), e1 = pme::harness::state_energy(next);
    if (e1 > e0 + tol_.energy_slack * std::max(1.0, std::abs(e0))) fail("energy increase " + str(e1 - e0));

    if (const auto* ls = std::get_if<pme::LogDensityState>(&next)) {
      for (Eigen::Index i = 0; i < ls->u.size(); ++i)
        if (ls->active[i] && !(std::isfinite(ls->u[i]) && std::exp(ls->u[i]) > 0.0)) fail("non-positive active density");
      if (bounds_) {
        const auto& lp = std::get<pme::LogDensityState>(prev);
        const auto b0 = pme::bounds(lp), b1 = pme::bounds(*ls);
        const double slack = tol_.bound_slack * std::max(1.0, b0.max);
        if (b1.min < b0.min - slack || b1.max > b0.max + slack)
          fail("bounds left [" + str(b0.min) + ", " + str(b0.max) + "]: [" + str(b1.min) + ", " + str(b1.max) + "]");
      }
    } else {
      const auto& ms = std::get<pme::MixedState>(next);
      const auto& mp = std::get<pme::MixedState>(prev);
      if (pme::local_balance(ms, mp, dt).lpNorm<Eigen::Infinity>() > 1e-10) fail("local balance");
      if (dt <= pme::cfl_max_dt(ms).global) {
        ++cfl_respected_;
        if (ms.rho.minCoeff() < tol_.positivity) fail("negative density under CFL: " + str(ms.rho.minCoeff()));
      }
    }
  }

  bool ok() const { return failure_.empty(); }
  const std::string& failure() const { return failure_; }
  int steps() const { return steps_; }
  int cfl_respected_steps() const { return cfl_respected_; }

 private:
  static std::string str(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  }
  void fail(const std::string& what) {
    if (failure_.empty()) failure_ = "step " + std::to_string(steps_) + ": " + what;
  }

  bool bounds_;
  Tolerances tol_;
  double mass0_ = 0.0;
  int steps_ = 0;
  int cfl_respected_ = 0;
  std::string failure_;
};

enum class Data { positive, compact };

struct Case {
  std::string mesh_name;
  std::shared_ptr<const pme::Discretization> disc;
  pme::harness::Scheme scheme;
  pme::StiffnessVariant variant = pme::StiffnessVariant::vertex;
  Data data = Data::positive;
  double m = 2.0;
  double dt = 0.01;
  int steps = 8;
  unsigned seed = 0;

  std::string describe() const {
    std::ostringstream os;
    os << mesh_name << ' ' << (scheme == pme::harness::Scheme::mixed ? "mixed" : "logdensity")
       << (scheme == pme::harness::Scheme::logdensity ? (variant == pme::StiffnessVariant::edge ? "/edge" : "/vertex") : "")
       << (data == Data::positive ? " positive" : " compact") << " m=" << m << " dt=" << dt << " seed=" << seed;
    return os.str();
  }
};

struct TestMesh {
  std::string name;
  std::shared_ptr<const pme::Discretization> disc;
  bool strict_delaunay;
  bool delaunay;
};

/// The meshes every invariant is exercised on, all covering [-1, 1]^d.
inline std::vector<TestMesh> test_meshes() {
  using namespace pme;
  std::mt19937 rng(2024);
  const Box box{{-1, -1}, {1, 1}};
  std::vector<std::pair<std::string, Mesh>> raw;
  raw.emplace_back("interval", build_structured_mesh(MeshKind::interval, box, 40));
  raw.emplace_back("interval-jittered", oracle::jitter(build_structured_mesh(MeshKind::interval, box, 40), 0.35, rng));
  raw.emplace_back("triangle", build_structured_mesh(MeshKind::triangle, box, 12));
  raw.emplace_back("acute", build_structured_mesh(MeshKind::acute_triangle, box, 10));
  raw.emplace_back("acute-jittered", oracle::jitter(build_structured_mesh(MeshKind::acute_triangle, box, 10), 0.08, rng));
  raw.emplace_back("triangle-jittered", oracle::jitter(build_structured_mesh(MeshKind::triangle, box, 10), 0.3, rng));
  raw.emplace_back("quad", build_structured_mesh(MeshKind::quad, box, {12, 10}));
  std::vector<TestMesh> out;
  for (auto& [name, mesh] : raw) {
    auto d = make_discretization(std::move(mesh));
    out.push_back({name, d, is_delaunay(d->geometry, true), is_delaunay(d->geometry, false)});
  }
  return out;
}

/// Random initial density: a few Gaussian bumps on a floor (positive) or
/// compactly supported bumps (compact).
inline std::function<double(const pme::Point&)> random_density(Data data, int dim, std::mt19937& rng) {
  std::uniform_real_distribution<double> c(-0.6, 0.6), a(0.2, 2.0), w(0.15, 0.45);
  struct Bump {
    double x, y, amp, width;
  };
  std::vector<Bump> bumps;
  const int n = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) bumps.push_back({c(rng), dim == 2 ? c(rng) : 0.0, a(rng), w(rng)});
  const double floor = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
  return [=](const pme::Point& p) {
    double v = data == Data::positive ? floor : 0.0;
    for (const auto& b : bumps) {
      const double r2 = ((p[0] - b.x) * (p[0] - b.x) + (dim == 2 ? (p[1] - b.y) * (p[1] - b.y) : 0.0)) / (b.width * b.width);
      v += data == Data::positive ? b.amp * std::exp(-r2) : b.amp * std::max(0.0, 1.0 - r2) * std::max(0.0, 1.0 - r2);
    }
    return v;
  };
}

/// Deterministic list of property cases covering every mesh, both schemes,
/// both stiffness variants where applicable and both kinds of data.
inline std::vector<Case> property_cases(unsigned seed, int per_combination) {
  using pme::harness::Scheme;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> logdt(std::log(1e-3), std::log(5e-2));
  const double ms[] = {1.5, 2.0, 3.0, 4.0};
  std::vector<Case> out;
  for (const auto& tm : test_meshes()) {
    for (Scheme scheme : {Scheme::logdensity, Scheme::mixed}) {
      if (scheme == Scheme::mixed && !tm.strict_delaunay) continue;
      for (auto variant : {pme::StiffnessVariant::vertex, pme::StiffnessVariant::edge}) {
        if (scheme == Scheme::mixed && variant == pme::StiffnessVariant::edge) continue;
        if (variant == pme::StiffnessVariant::edge && tm.disc->mesh.kind == pme::CellKind::quad) continue;
        for (Data data : {Data::positive, Data::compact}) {
          for (int r = 0; r < per_combination; ++r) {
            Case c;
            c.mesh_name = tm.name;
            c.disc = tm.disc;
            c.scheme = scheme;
            c.variant = variant;
            c.data = data;
            c.m = data == Data::compact ? ms[1 + rng() % 3] : ms[rng() % 4];
            c.dt = std::exp(logdt(rng));
            c.seed = static_cast<unsigned>(rng());
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

struct Outcome {
  bool ok = true;
  std::string message;
  int cfl_respected = 0;
  bool bounds_checked = false;
};

inline Outcome run_case(const Case& c) {
  std::mt19937 rng(c.seed);
  auto rho0 = random_density(c.data, c.disc->mesh.dim, rng);
  // Bound preservation is a theorem for the edge variant on Delaunay meshes.
  const bool bounds = c.scheme == pme::harness::Scheme::logdensity && c.variant == pme::StiffnessVariant::edge &&
                      pme::is_delaunay(c.disc->geometry, false);
  Checker check(bounds);
  Outcome out;
  out.bounds_checked = bounds;
  try {
    SchemeState s = c.scheme == pme::harness::Scheme::logdensity ? SchemeState(pme::init_log_state(c.disc, rho0, c.m))
                                                                  : SchemeState(pme::init_mixed_state(c.disc, rho0, c.m));
    for (int n = 0; n < c.steps && check.ok(); ++n) {
      SchemeState next = c.scheme == pme::harness::Scheme::logdensity
                             ? SchemeState(pme::step_logdensity(std::get<pme::LogDensityState>(s), c.dt, c.variant))
                             : SchemeState(pme::step_mixed(std::get<pme::MixedState>(s), c.dt));
      check(s, next, c.dt);
      s = std::move(next);
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = c.describe() + ": " + e.what();
    return out;
  }
  out.ok = check.ok();
  if (!out.ok) out.message = c.describe() + ": " + check.failure();
  out.cfl_respected = check.cfl_respected_steps();
  return out;
}

/// Uniform data must come back bit-identical from one step of either scheme.
inline bool uniform_fixed_point(const TestMesh& tm, pme::harness::Scheme scheme, pme::StiffnessVariant variant,
                                double value, double m, double dt) {
  auto rho0 = [&](const pme::Point&) { return value; };
  if (scheme == pme::harness::Scheme::logdensity) {
    auto s = pme::init_log_state(tm.disc, rho0, m);
    auto n = pme::step_logdensity(s, dt, variant);
    return n.u == s.u && n.active == s.active;
  }
  auto s = pme::init_mixed_state(tm.disc, rho0, m);
  auto n = pme::step_mixed(s, dt);
  return n.rho == s.rho;
}

}  // namespace invariants
