#include <gtest/gtest.h>

#include "thermoform/coding.hpp"

using namespace thermoform;

namespace {

// z_n for x -> d x with straight arcs from w: base-d digits of alpha_1..alpha_{n+1}
// followed by the basepoint pulled back n+1 times.
double circle_oracle(const std::vector<int>& a, int n, int d, double w) {
  double x = 0, scale = 1;
  for (int i = 0; i <= n; ++i) {
    scale /= d;
    x += (a[i] - 1) * scale;
  }
  x += w * scale;
  return x - std::floor(x);
}

CodingTree circle_tree(int d, double w = 0.0) { return build_tree(make_system({"circle_" + std::to_string(d)}), w); }

CodingTree julia_tree(point c) {
  auto s = make_system({.name = "quadratic_julia", .c = c});
  return build_tree(s, propose_basepoint(*s));
}

}  // namespace

TEST(BuildTree, CirclePreimages) {
  auto t = circle_tree(2, 0.3);
  ASSERT_EQ(t.wi.size(), 2u);
  EXPECT_NEAR(t.wi[0].real(), 0.15, 1e-15);
  EXPECT_NEAR(t.wi[1].real(), 0.65, 1e-15);
  EXPECT_GE(t.k, 1);
}

TEST(BuildTree, JuliaAtZero) {
  auto s = make_system({.name = "quadratic_julia", .c = 0.0});
  auto t = build_tree(s, 1.0);
  EXPECT_NEAR(std::abs(t.wi[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(t.wi[1] + 1.0), 0.0, 1e-15);
}

TEST(BuildTree, BranchValueRejected) {
  auto s = make_system({.name = "quadratic_julia", .c = -0.1});
  EXPECT_THROW(build_tree(s, -0.1), construction_error);
}

TEST(CodePoint, FixedPointsOfTheBranches) {
  auto t = circle_tree(2, 0.3);
  auto ones = code_point(t, ShiftWord(2, std::vector<int>(41, 1)), 40);
  auto twos = code_point(t, ShiftWord(2, std::vector<int>(41, 2)), 40);
  EXPECT_LT(t.sys->dist(ones.z, 0.0), 1e-11);
  EXPECT_LT(t.sys->dist(twos.z, 0.0), 1e-11);
  EXPECT_LE(ones.tail_bound, 1e-10);
  EXPECT_EQ(code_point(t, ShiftWord(2, {2, 1}), 0).z, t.wi[1]);
  EXPECT_THROW(code_point(t, ShiftWord(2, {1, 2}), 2), input_error);
}

TEST(CodePoint, MatchesBaseDExpansion) {
  for (int d : {2, 3}) {
    for (double w : {0.0, 0.3}) {
      auto t = circle_tree(d, w);
      stream_rng g(9, std::uint64_t(d));
      for (int trial = 0; trial < 50; ++trial) {
        int n = int(g() % 30);
        auto a = random_word(d, n + 1, g);
        double z = code_point(t, a, n).z.real();
        EXPECT_LT(detail::circle_gap(z, circle_oracle(a.symbols(), n, d, w)), 1e-13) << d << " " << n;
      }
    }
  }
}

TEST(CodePoint, TailBoundSoundness) {
  for (auto t : {circle_tree(2), julia_tree(-0.1)}) {
    stream_rng g(4);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_word(2, 32, g);
      auto s = root_state(t, a[1]);
      for (int n = 0; n + 2 <= 32; ++n) {
        auto next = extend(t, s, a[n + 2]);
        EXPECT_LE(t.sys->dist(s.z(), next.z()), t.C * t.k * std::pow(t.theta, n + 1) + 1e-14) << n;
        s = std::move(next);
      }
    }
  }
}

TEST(Semiconjugacy, Circle) {
  auto r = check_semiconjugacy(circle_tree(2), 1000, 40, 1);
  EXPECT_LT(r.max_defect, 1e-9);
  EXPECT_TRUE(r.pass);
  auto t = circle_tree(3);
  for (int s = 1; s <= 3; ++s) {
    ShiftWord a(3, std::vector<int>(42, s));
    double defect = t.sys->dist(t.sys->forward(code_point(t, a, 40).z), code_point(t, a.shifted(1), 40).z);
    EXPECT_LT(defect, 1e-14);
  }
}

TEST(Semiconjugacy, Julia) {
  auto r = check_semiconjugacy(julia_tree(-0.1), 200, 40, 2);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_defect, 2 * r.tail_bound + 1e-8);
}

TEST(HolderEstimate, SlopeIsLogContraction) {
  auto h2 = holder_estimate(circle_tree(2), 800, 3);
  EXPECT_NEAR(h2.slope, std::log(0.5), 0.05);
  EXPECT_TRUE(h2.pass);
  auto h3 = holder_estimate(circle_tree(3), 800, 3, 12);
  EXPECT_NEAR(h3.slope, std::log(1.0 / 3), 0.05);
}

TEST(Coverage, Circle) {
  auto t = circle_tree(2);
  auto grid = t.sys->repellor_sample(256, 0);
  EXPECT_EQ(surjectivity_coverage(t, grid, 10).fraction, 1.0);
  EXPECT_EQ(surjectivity_coverage(t, {}, 10).fraction, 1.0);
  auto shallow = surjectivity_coverage(t, grid, 4);
  EXPECT_LT(shallow.fraction, 1.0);
  EXPECT_FALSE(shallow.advisory.empty());
}

TEST(FiberCount, CircleExamples) {
  auto t = circle_tree(2);
  EXPECT_EQ(fiber_cylinder_count(t, 0.3, 0).count, 2);
  for (int n : {1, 5, 12, 20}) {
    EXPECT_EQ(fiber_cylinder_count(t, 0.0, n).count, 2) << n;
    EXPECT_LE(fiber_cylinder_count(t, 1.0 / 3, n).count, 2) << n;
  }
  EXPECT_LT(fiber_cylinder_count(t, 1.0 / 3, 20).rate, 0.05);
}

TEST(FiberCount, JuliaTailBall) {
  auto t = julia_tree(-0.1);
  point x = t.sys->repellor_sample(1, 5)[0];
  auto c = fiber_cylinder_count(t, x, 8);
  EXPECT_GE(c.count, 1);
  EXPECT_THROW(fiber_cylinder_count(t, x, 12, 1e-9, 10), budget_error);
}
