#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pme/mixed.hpp"
#include "pme/problems.hpp"

using namespace pme;

namespace {

std::shared_ptr<const Discretization> interval(int n, double a = 0, double b = 1) {
  return make_discretization(build_structured_mesh(MeshKind::interval, Box{{a, 0}, {b, 0}}, n));
}

MixedState with_density(std::shared_ptr<const Discretization> d, std::vector<double> rho, double m) {
  return init_mixed_state(d, [&, k = 0](const Point& x) mutable {
    // Barycenters are visited in cell order.
    (void)x;
    return rho[k++];
  }, m);
}

int interior_face(const Mesh& mesh) {
  for (std::size_t f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.faces[f].boundary()) return static_cast<int>(f);
  return -1;
}

}  // namespace

TEST(Closure, PotentialAndDerivative) {
  EXPECT_DOUBLE_EQ(potential(0.5, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(potential(-1.0, 3.0), 0.0);
  EXPECT_NEAR(potential(2.0, 3.0), 1.5 * 4.0, 1e-14);
  EXPECT_NEAR(potential_derivative(2.0, 3.0), 6.0, 1e-14);
  EXPECT_TRUE(std::isfinite(potential_derivative(0.0, 1.5)));
  EXPECT_EQ(potential_derivative(0.0, 3.0), 0.0);
}

TEST(InitMixedState, Values) {
  auto d = interval(4);
  auto s = init_mixed_state(d, [](const Point&) { return 1.0; }, 2.0);
  EXPECT_EQ(s.rho.minCoeff(), 1.0);
  EXPECT_EQ(s.flux.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_THROW(init_mixed_state(d, [](const Point&) { return -1e-3; }, 2.0), InvalidArgument);

  auto bd = interval(100, -10, 10);
  auto b = init_mixed_state(bd, [](const Point& x) { return barenblatt(x, 0, 2.0, 3.0, 1); }, 2.0);
  const double eta = front_position(0, 2.0, 3.0);
  for (std::size_t k = 0; k < bd->mesh.num_cells(); ++k) {
    const double lo = bd->mesh.vertices[bd->mesh.cells[k][0]][0];
    const double hi = bd->mesh.vertices[bd->mesh.cells[k][1]][0];
    if (lo >= eta || hi <= -eta) EXPECT_EQ(b.rho[k], 0.0);
  }

  // Odd cell count: the centre quad has its barycenter at the origin.
  auto gd = make_discretization(build_structured_mesh(MeshKind::quad, Box{{-1, -1}, {1, 1}}, 9));
  auto g = init_mixed_state(gd, [](const Point& x) { return merging_gaussians(x[0], x[1]); }, 3.0);
  EXPECT_NEAR(g.rho[40], 2 * std::exp(-3.6), 1e-15);
  EXPECT_NEAR(g.rho[40], 0.05465, 1e-5);
}

TEST(InitMixedState, RejectsNonStrictDelaunayMesh) {
  auto d = make_discretization(build_structured_mesh(MeshKind::triangle, Box{}, 4));
  EXPECT_THROW(init_mixed_state(d, [](const Point&) { return 1.0; }, 2.0), InvalidArgument);
}

TEST(CondenseVelocity, HandValues) {
  auto d = interval(2);
  Vector mu(2);
  mu << 2, 0;
  Vector u = condense_velocity(d->mesh, d->velocity_weights, mu);
  const int f = interior_face(d->mesh);
  // Unit-length cells on [0, 2] give omega = 1 at the interior node.
  auto d2 = interval(2, 0, 2);
  Vector u2 = condense_velocity(d2->mesh, d2->velocity_weights, mu);
  EXPECT_NEAR(u2[f] * d2->mesh.faces[f].normal[0], 2.0, 1e-14);
  for (std::size_t g = 0; g < d->mesh.num_faces(); ++g)
    if (d->mesh.faces[g].boundary()) EXPECT_EQ(u[g], 0.0);
  mu << 1.3, 1.3;
  EXPECT_EQ(condense_velocity(d->mesh, d->velocity_weights, mu).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(CondenseVelocity, RejectsVanishingWeight) {
  auto mesh = make_mesh(2, CellKind::triangle, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, -1}, {0, 2, 3, -1}});
  auto d = make_discretization(mesh);
  EXPECT_THROW(condense_velocity(d->mesh, d->velocity_weights, Vector::Ones(2)), InvalidArgument);
}

TEST(Upwind, SelectsOutflowCell) {
  auto d = interval(2);
  const Face& face = d->mesh.faces[interior_face(d->mesh)];
  Vector rho(2);
  rho[face.cells[0]] = 0.9;
  rho[face.cells[1]] = 0.1;
  EXPECT_EQ(upwind_value(rho, face, 1.0), 0.9);
  EXPECT_EQ(upwind_value(rho, face, -1.0), 0.1);
  EXPECT_EQ(upwind_value(rho, face, 0.0) * 0.0, 0.0);
}

TEST(StepMixed, TwoCellOracle) {
  // Two unit cells, m = 2, dt = 1/4: mu = 2 rho, u = 2 (rho_L - rho_R),
  // upwind from the left: rho_L = 1 - dt * 1 * u with rho_R = 1 - rho_L.
  const double dt = 0.25;
  const double ref = oracle::bisect([&](double a) { return a - 1 + dt * 2 * (a - (1 - a)); }, 0.0, 1.0);
  auto d = interval(2, 0, 2);
  auto s = with_density(d, {1.0, 0.0}, 2.0);
  StepInfo info;
  auto next = step_mixed(s, dt, {}, &info);
  EXPECT_NEAR(next.rho[0], ref, 1e-10);
  EXPECT_NEAR(next.rho[1], 1 - ref, 1e-10);
  EXPECT_NEAR(next.rho[0], 0.75, 1e-12);
  EXPECT_NEAR(next.rho[1], 0.25, 1e-12);
  const int f = interior_face(d->mesh);
  EXPECT_NEAR(next.flux[f] * d->mesh.faces[f].normal[0], 1.0, 1e-12);
  EXPECT_NEAR(physical_energy(next), 0.625, 1e-12);
  EXPECT_LE(local_balance(next, s, dt).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(StepMixed, UniformStateIsFixedPoint) {
  auto d = make_discretization(build_structured_mesh(MeshKind::acute_triangle, Box{}, 4));
  auto s = init_mixed_state(d, [](const Point&) { return 0.4; }, 3.0);
  StepInfo info;
  auto next = step_mixed(s, 0.5, {}, &info);
  EXPECT_EQ(info.iterations, 0);
  for (Eigen::Index k = 0; k < s.rho.size(); ++k) EXPECT_EQ(next.rho[k], s.rho[k]);
}

TEST(StepMixed, BalanceMassAndCondensationConsistency) {
  for (MeshKind kind : {MeshKind::acute_triangle, MeshKind::quad}) {
    auto d = make_discretization(build_structured_mesh(kind, Box{{-1, -1}, {1, 1}}, 10));
    auto s = init_mixed_state(d, [](const Point& x) { return merging_gaussians(x[0], x[1]); }, 3.0);
    const double mass0 = total_mass(s);
    for (int n = 0; n < 5; ++n) {
      auto next = step_mixed(s, 0.01, {});
      EXPECT_LE(local_balance(next, s, 0.01).lpNorm<Eigen::Infinity>(), 1e-10);
      EXPECT_NEAR(total_mass(next), mass0, 1e-10 * mass0);
      EXPECT_LE(physical_energy(next), physical_energy(s) + 1e-10);
      Vector u = condense_velocity(d->mesh, d->velocity_weights, next.mu);
      EXPECT_LE((u - next.flux).lpNorm<Eigen::Infinity>(), 1e-12 * std::max(1.0, u.lpNorm<Eigen::Infinity>()));
      for (Eigen::Index k = 0; k < next.rho.size(); ++k)
        EXPECT_NEAR(next.mu[k], potential(next.rho[k], 3.0), 1e-12 * std::max(1.0, next.mu[k]));
      s = std::move(next);
    }
  }
}

TEST(StepMixed, RejectsBadStep) {
  auto s = with_density(interval(2), {1.0, 0.0}, 2.0);
  EXPECT_THROW(step_mixed(s, -0.1), InvalidArgument);
}

TEST(Cfl, HandValues) {
  auto d = interval(3, 0, 3);
  auto s = init_mixed_state(d, [](const Point&) { return 1.0; }, 2.0);
  EXPECT_TRUE(std::isinf(cfl_max_dt(s).global));

  // Middle cell with unit outflow through one face, then through both.
  const auto& mesh = d->mesh;
  int left = -1, right = -1;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.faces[f].boundary()) continue;
    (mesh.vertices[mesh.faces[f].vertices[0]][0] < 1.5 ? left : right) = static_cast<int>(f);
  }
  auto out_of_middle = [&](int f) { return mesh.faces[f].cells[0] == 1 ? 1.0 : -1.0; };
  s.flux.setZero();
  s.flux[right] = out_of_middle(right);
  EXPECT_NEAR(cfl_max_dt(s).per_cell[1], 1.0, 1e-15);
  s.flux[left] = out_of_middle(left);
  EXPECT_NEAR(cfl_max_dt(s).per_cell[1], 0.5, 1e-15);
  EXPECT_NEAR(cfl_max_dt(s).global, 0.5, 1e-15);
}

TEST(PhysicalEnergy, HandValues) {
  auto d = interval(1);
  EXPECT_NEAR(physical_energy(init_mixed_state(d, [](const Point&) { return 1.0; }, 2.0)), 1.0, 1e-15);
  EXPECT_EQ(physical_energy(init_mixed_state(d, [](const Point&) { return 0.0; }, 2.0)), 0.0);
}
