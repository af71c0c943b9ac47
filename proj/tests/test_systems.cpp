#include <gtest/gtest.h>

#include "thermoform/systems.hpp"

using namespace thermoform;

TEST(Systems, CircleArithmetic) {
  auto s = make_system({"circle_2"});
  EXPECT_NEAR(s->forward(0.3).real(), 0.6, 1e-15);
  auto pre = s->inverse_branches(0.6);
  ASSERT_EQ(pre.size(), 2u);
  EXPECT_NEAR(pre[0].z.real(), 0.3, 1e-15);
  EXPECT_NEAR(pre[1].z.real(), 0.8, 1e-15);
  EXPECT_NEAR(s->dist(0.95, 0.05), 0.1, 1e-15);
}

TEST(Systems, LocalModelFormula) {
  auto s = make_system({.name = "local_model", .d = 2, .lambda = 2});
  point z = std::polar(0.25, pi / 3);
  point g = s->forward(z);
  EXPECT_NEAR(std::abs(g), 0.5, 1e-15);
  EXPECT_NEAR(std::arg(g), 2 * pi / 3, 1e-14);
}

TEST(Systems, JuliaAtZeroIsUnitCircle) {
  auto s = make_system({.name = "quadratic_julia", .c = 0.0});
  for (point z : s->repellor_sample(500, 3)) EXPECT_NEAR(std::abs(z), 1.0, 1e-6);
  point z(0.3, 0.7);
  auto pre = s->inverse_branches(z);
  EXPECT_NEAR(std::abs(pre[0].z - std::sqrt(z)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pre[1].z + std::sqrt(z)), 0.0, 1e-15);
}

TEST(Systems, RejectsParametersOutsideRange) {
  EXPECT_THROW(make_system({.name = "quadratic_julia", .c = 0.3}), parameter_error);
  EXPECT_THROW(make_system({.name = "circle_perturbed", .d = 2, .eps = 0.2}), parameter_error);
  EXPECT_THROW(make_system({.name = "local_model", .d = 2, .lambda = 0.9}), parameter_error);
  EXPECT_THROW(make_system({.name = "circle_1"}), parameter_error);
  EXPECT_THROW(make_system({.name = "henon"}), input_error);
}

TEST(Systems, DegreeIdentityAndInverseConsistency) {
  for (system_spec spec : {system_spec{"circle_3"}, system_spec{.name = "circle_perturbed", .d = 2, .eps = 0.1},
                           system_spec{.name = "quadratic_julia", .c = point(-0.1, 0.05)},
                           system_spec{.name = "local_model", .d = 3, .lambda = 2}}) {
    auto s = make_system(spec);
    for (point y : s->repellor_sample(300, 5)) {
      auto pre = s->inverse_branches(y);
      EXPECT_EQ(int(pre.size()), s->degree()) << s->name();
      for (auto& p : pre) EXPECT_LE(s->dist(s->forward(p.z), y), 1e-10) << s->name();
    }
  }
}

TEST(Systems, RepellorSample) {
  auto s = make_system({"circle_2"});
  auto v = s->repellor_sample(4, 0);
  ASSERT_EQ(v.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(v[i].real(), 0.25 * i);
  auto j = make_system({.name = "quadratic_julia", .c = -0.1});
  EXPECT_EQ(j->repellor_sample(50, 9), j->repellor_sample(50, 9));
  EXPECT_NE(j->repellor_sample(50, 9), j->repellor_sample(50, 10));
}

TEST(LiftPath, CircleArc) {
  auto s = make_system({"circle_2"});
  auto path = detail::segment(0.1, 0.3, 1e-3);
  auto lift = lift_path(*s, path, 0.05);
  ASSERT_EQ(lift.size(), path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    EXPECT_NEAR(lift[i].real(), path[i].real() / 2, 1e-15);
    EXPECT_LE(s->dist(s->forward(lift[i]), path[i]), 1e-10);
  }
}

TEST(LiftPath, ConstantPath) {
  auto s = make_system({"circle_3"});
  std::vector<point> path(20, point(0.4));
  auto lift = lift_path(*s, path, point(0.8));
  for (point p : lift) EXPECT_NEAR(p.real(), 0.8, 1e-15);
}

TEST(LiftPath, JuliaQuarterCircleHalvesAngle) {
  auto s = make_system({.name = "quadratic_julia", .c = 0.0});
  std::vector<point> path;
  for (int i = 0; i <= 200; ++i) path.push_back(std::polar(1.0, 0.5 * pi * i / 200));
  auto lift = lift_path(*s, path, point(1.0));
  for (std::size_t i = 0; i < path.size(); ++i) {
    EXPECT_NEAR(std::arg(lift[i]), std::arg(path[i]) / 2, 1e-12);
    EXPECT_LE(std::abs(s->forward(lift[i]) - path[i]), 1e-10);
  }
  auto other = lift_path(*s, path, point(-1.0));
  EXPECT_NEAR(std::abs(other.back() - std::polar(1.0, pi / 4 + pi)), 0.0, 1e-12);
}

TEST(LiftPath, Errors) {
  auto s = make_system({"circle_2"});
  EXPECT_THROW(lift_path(*s, {0.1, 0.6}, 0.05), refinement_error);
  auto j = make_system({.name = "quadratic_julia", .c = -0.1});
  EXPECT_THROW(lift_path(*j, detail::segment(0.5, -0.1, 1e-3), std::sqrt(point(0.6))), domain_error);
  EXPECT_THROW(lift_path(*s, {0.1, 0.1}, 0.3), input_error);
}

TEST(SingularTimes, CircleHasNone) {
  auto s = make_system({"circle_2"});
  auto orbit = forward_orbit(*s, 0.1234567, 200);
  EXPECT_EQ(singular_times(*s, orbit, 0.49).count, 0u);
  EXPECT_THROW(singular_times(*s, {0.1, 0.3}, 0.1), input_error);
}

TEST(SingularTimes, JuliaAwayFromCritical) {
  auto s = make_system({.name = "quadratic_julia", .c = 0.0});
  auto orbit = forward_orbit(*s, std::polar(1.0, 0.7), 100);
  EXPECT_EQ(singular_times(*s, orbit, 0.5).count, 0u);
}

TEST(SingularTimes, LocalModelAnnulus) {
  auto s = make_system({.name = "local_model", .d = 2, .lambda = 2});
  auto orbit = forward_orbit(*s, std::polar(0.05, 1.0), 4);  // radii 0.05 .. 0.4
  EXPECT_EQ(singular_times(*s, orbit, 0.05).count, 0u);
  // Near the critical point the preimage mate is close.
  auto near = forward_orbit(*s, std::polar(0.001, 1.0), 3);
  EXPECT_GE(singular_times(*s, near, 0.05).count, 1u);
}

TEST(SingularTimes, BudgetBoundOnBundledSystems) {
  for (system_spec spec : {system_spec{"circle_2"}, system_spec{.name = "quadratic_julia", .c = -0.1}}) {
    auto s = make_system(spec);
    auto b = s->budget();
    for (point x0 : s->repellor_sample(20, 4)) {
      auto orbit = forward_orbit(*s, x0, 60);
      EXPECT_LE(double(singular_times(*s, orbit, b.eps, 1e-6).count), b.zeta * 60 + b.p) << s->name();
    }
  }
}
