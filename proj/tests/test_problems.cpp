#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pme/problems.hpp"

using namespace pme;

TEST(Barenblatt, PeakAndSupport) {
  EXPECT_DOUBLE_EQ(barenblatt({0, 0}, 0, 2.0, 3.0, 1), 3.0);
  EXPECT_EQ(barenblatt({front_position(0, 2.0, 3.0) + 1e-9, 0}, 0, 2.0, 3.0, 1), 0.0);
  EXPECT_EQ(barenblatt({50, 0}, 0.7, 3.0, 1.0, 2), 0.0);
  EXPECT_THROW(barenblatt({0, 0}, 0, 1.0, 1.0, 1), InvalidArgument);
}

TEST(Barenblatt, MatchesIndependentFormula) {
  for (int d : {1, 2})
    for (double m : {1.5, 2.0, 3.0, 4.0})
      for (double t : {0.0, 0.3, 1.0})
        for (double x : {0.0, 0.5, 1.7, 2.9}) {
          const Point p{x, d == 2 ? -0.4 * x : 0.0};
          const double r2 = p[0] * p[0] + p[1] * p[1];
          EXPECT_NEAR(barenblatt(p, t, m, 1.3, d), oracle::barenblatt_ref(r2, t, m, 1.3, d), 1e-14);
        }
}

TEST(Barenblatt, DimensionOneExponentIsOneOverMPlusOne) {
  for (double m : {1.5, 2.0, 3.0, 7.0}) EXPECT_DOUBLE_EQ(barenblatt_exponent(m, 1), 1.0 / (m + 1.0));
}

TEST(Barenblatt, MassIsConstantInTime) {
  for (double m : {2.0, 3.0}) {
    auto mass = [&](double t) {
      const double eta = front_position(t, m, 3.0);
      return oracle::simpson([&](double x) { return barenblatt({x, 0}, t, m, 3.0, 1); }, -eta, eta, 200000);
    };
    const double m0 = mass(0.0);
    EXPECT_NEAR(mass(0.5), m0, 1e-6 * m0);
    EXPECT_NEAR(mass(1.0), m0, 1e-6 * m0);
  }
}

TEST(Barenblatt, FiniteDifferenceResidual) {
  for (int d : {1, 2})
    for (double m : {2.0, 3.0}) {
      auto rho = [&](double x, double y, double t) { return barenblatt({x, y}, t, m, 1.0, d); };
      for (double t : {0.2, 0.7})
        for (double x : {0.0, 0.4, 0.9}) {
          const double y = d == 2 ? 0.3 : 0.0;
          EXPECT_LE(std::abs(oracle::pme_residual_fd(rho, x, y, t, m, d)), 1e-3) << d << ' ' << m << ' ' << t << ' ' << x;
        }
    }
}

TEST(FrontPosition, Values) {
  EXPECT_NEAR(front_position(0, 2.0), std::sqrt(12.0), 1e-14);
  EXPECT_NEAR(front_position(0, 3.0), std::sqrt(12.0), 1e-14);
  EXPECT_LT(front_position(0.5, 2.0), front_position(1.0, 2.0));
  // The front is where the profile vanishes.
  const double eta = front_position(0.6, 3.0, 3.0);
  EXPECT_GT(barenblatt({eta - 1e-6, 0}, 0.6, 3.0, 3.0, 1), 0.0);
  EXPECT_EQ(barenblatt({eta + 1e-6, 0}, 0.6, 3.0, 3.0, 1), 0.0);
}

TEST(WaitingTime, ProfileAndTStar) {
  EXPECT_DOUBLE_EQ(t_star(3, 0), 0.125);
  EXPECT_NEAR(t_star(3, 0.25), 1.0 / 6, 1e-15);
  EXPECT_THROW(t_star(3, 0.3), InvalidArgument);
  EXPECT_NEAR(waiting_time_profile(0, 3, 0), std::sqrt(2.0 / 3), 1e-15);
  EXPECT_NEAR(waiting_time_profile(0, 3, 0), 0.8165, 1e-4);
  EXPECT_EQ(waiting_time_profile(2.0, 3, 0), 0.0);
  const double h = std::numbers::pi / 2;
  EXPECT_NEAR(waiting_time_profile(h, 3, 0.5), 0.0, 1e-7);
  EXPECT_NEAR(waiting_time_profile(h - 1e-8, 3, 0), 0.0, 1e-7);
}

TEST(InitialData, GaussiansAndHorseshoe) {
  EXPECT_NEAR(merging_gaussians(0.3, 0.3), 1 + std::exp(-14.4), 1e-15);
  EXPECT_EQ(complex_support(2, 2, 3), 0.0);
  EXPECT_NEAR(complex_support(0, 0.75, 3), 3.125, 1e-13);
  EXPECT_NEAR(complex_support(0.75, 0, 3), 3.125, 1e-13);
  EXPECT_NEAR(complex_support(-0.75, 0, 3), 3.125, 1e-13);
  // Vanishes at the seams of the support.
  // m = 3: 25 (q - d^2)^(3/4) with q - d^2 = 5e-10 just inside a seam.
  const double seam = 25 * std::pow(5e-10 - 1e-18, 0.75);
  EXPECT_NEAR(complex_support(-0.5 - 1e-9, 0, 3) / seam, 1.0, 1e-6);
  EXPECT_NEAR(complex_support(0.25 - 1e-9, 0.75, 3) / seam, 1.0, 1e-6);
  EXPECT_EQ(complex_support(-0.5 + 1e-9, 0, 3), 0.0);
  EXPECT_EQ(complex_support(0.25 + 1e-9, 0.75, 3), 0.0);
  EXPECT_EQ(complex_support(0.3, 0.3, 3), 0.0);
  for (double x = -2; x <= 2; x += 0.05)
    for (double y = -2; y <= 2; y += 0.05) EXPECT_GE(complex_support(x, y, 2.5), 0.0);
}

TEST(Catalog, NamesAndDomains) {
  for (const auto& name : problem_names()) {
    auto p = make_problem(name, 3.0);
    EXPECT_EQ(p.name, name);
    EXPECT_TRUE(p.initial);
    for (double x : {-0.4, 0.0, 0.9}) EXPECT_GE(p.initial({x, 0.2}), 0.0);
    if (p.exact) EXPECT_DOUBLE_EQ((*p.exact)({0.3, 0.1}, 0.0), p.initial({0.3, 0.1}));
  }
  auto b1 = make_problem("barenblatt1d", 2.0);
  EXPECT_EQ(b1.dim, 1);
  EXPECT_EQ(b1.domain.lo[0], -10.0);
  EXPECT_EQ(b1.inner_region->hi[0], 5.0);
  auto b2 = make_problem("barenblatt2d", 2.0);
  EXPECT_EQ(b2.domain.hi[1], 6.0);
  EXPECT_EQ(b2.inner_region->lo[1], -3.0);
  auto w = make_problem("waiting", 3.0);
  EXPECT_DOUBLE_EQ(*w.waiting_time, 0.125);
  EXPECT_DOUBLE_EQ(*w.tracked_point, std::numbers::pi / 2);
  EXPECT_EQ(make_problem("horseshoe", 3.0).domain.lo[0], -2.0);
  EXPECT_THROW(make_problem("nope", 2.0), InvalidArgument);
  EXPECT_THROW(make_problem("gaussians", 1.0), InvalidArgument);
}
