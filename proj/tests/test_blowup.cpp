#include <gtest/gtest.h>

#include "thermoform/blowup.hpp"

using namespace thermoform;

namespace {

const BlowupModel& model22() {
  static const BlowupModel m = build_blowup(2, 2, 2, 6);
  return m;
}

// Chart point of the sample nearest to (t, theta) on ring t.
int at(const BlowupModel& m, double t, double theta) {
  return m.index_of(blown_point::chart(std::pow(m.lambda, -t), theta));
}

}  // namespace

TEST(Blowup, FiberDynamics) {
  const auto& m = model22();
  auto y = m.g(blown_point::fiber(0.3));
  EXPECT_TRUE(y.on_fiber());
  EXPECT_NEAR(y.theta, 0.6, 1e-15);
  EXPECT_EQ(m.blowdown(blown_point::fiber(0.77)), (base_point{0, 0, 0}));
}

TEST(Blowup, OffFiberIsTheLocalModel) {
  const auto& m = model22();
  auto f = make_system({.name = "local_model", .d = 2, .lambda = 2});
  for (double th : {0.05, 0.3, 0.81}) {
    auto x = blown_point::chart(0.2, th);
    point expect = f->forward(std::polar(0.2, 2 * pi * th));
    EXPECT_LT(std::abs(m.blowdown(m.g(x)).z - expect), 1e-15);
  }
}

TEST(Blowup, SemiconjugacyWithGrandOrbit) {
  auto m = build_blowup(2, 2, 3, 4);
  EXPECT_EQ(m.orbit_count(1), 1);
  EXPECT_EQ(m.orbit_count(3), 9);
  EXPECT_LE(blowdown_defect(m, 1000, 5), 1e-10);
  // S_(2,7) maps to S_(1,2) with the angle kept, then onto S_p.
  auto y = m.g(blown_point::fiber(0.4, 2, 7));
  EXPECT_EQ(y.q_level, 1);
  EXPECT_EQ(y.q_index, 2);
  EXPECT_EQ(y.theta, 0.4);
  EXPECT_EQ(m.g(y).q_level, 0);
}

TEST(Blowup, AnnuliMapDown) {
  const auto& m = model22();
  // A_{n,j}: n < t < n + 2 and j/d^(n+1) < theta < (j+2)/d^(n+1).
  auto inside = [&](int i, int n, std::int64_t j) {
    double D = double(ipow(2, n + 1)), t = m.t_of(i);
    return !m.is_fiber(i) && t > n && t < n + 2 &&
           detail::angle_in(m.theta_of(i), j / D, (j + 2) / D, false);
  };
  int checked = 0;
  for (int n = 1; n + 2 <= m.depth; ++n) {
    std::int64_t Dn = ipow(2, n + 1);
    for (std::int64_t j = 0; j < Dn; ++j) {
      std::vector<int> im;
      for (int i = 0; i < int(m.size()); ++i) {
        if (!inside(i, n, j)) continue;
        ASSERT_GE(m.img[i], 0);
        EXPECT_TRUE(inside(m.img[i], n - 1, j % (Dn / 2))) << n << " " << j;
        im.push_back(m.img[i]);
        ++checked;
      }
      std::sort(im.begin(), im.end());
      EXPECT_EQ(std::adjacent_find(im.begin(), im.end()), im.end()) << n << " " << j;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(ChainMetric, Axioms) {
  const auto& m = model22();
  int N = int(m.size());
  stream_rng g(3);
  for (int s = 0; s < 3000; ++s) {
    int a = int(g() % N), b = int(g() % N), c = int(g() % N);
    EXPECT_EQ(m.rho_A(a, a), 0.0);
    EXPECT_EQ(m.rho_A(a, b), m.rho_A(b, a));
    EXPECT_LE(m.rho_A(a, c), m.rho_A(a, b) + m.rho_A(b, c) + 1e-12);
    auto t = rho_tilde(m, a, b, 0.2);
    EXPECT_GE(t.value, m.rho1(a, b));
  }
}

TEST(ChainMetric, OuterRegionIsFree) {
  const auto& m = model22();
  int x = at(m, 0.25, 0.0), y = at(m, 0.75, 0.5);
  EXPECT_EQ(m.rho_A(x, y), 0.0);
  auto t = rho_tilde(m, x, y, 0.2);
  EXPECT_EQ(t.value, t.rho1);
  EXPECT_NEAR(t.rho1, std::pow(2, -0.25) + std::pow(2, -0.75), 1e-15);
}

TEST(ChainMetric, SectorBoundAndRadialExactness) {
  const auto& m = model22();
  // Same angle, adjacent rings inside the chart: every chain costs at least |r - r'|
  // and the shared sector realizes it.
  for (double t : {1.25, 2.75, 4.25, 6.25})
    for (double th : {0.0, 0.125, 0.625}) {
      int a = at(m, t, th), b = at(m, t + 0.5, th);
      EXPECT_NEAR(m.rho_A(a, b), std::pow(2, -t) - std::pow(2, -t - 0.5), 1e-15);
    }
  // rho_A <= lambda^-n rho_1(g^n x, g^n y) on A_{n,j}.
  int n = 3;
  double t = 4.25;
  int a = at(m, t, 1.0 / 64), b = at(m, t, 2.0 / 64);  // both in A_{3,0}: window (0, 2/16)
  double direct = std::abs(std::polar(std::pow(2, -t), 2 * pi * ipow(2, n) / 64.0) -
                           std::polar(std::pow(2, -t), 2 * pi * 2 * ipow(2, n) / 64.0));
  EXPECT_LE(m.rho_A(a, b), direct + 1e-15);
}

TEST(ChainMetric, FiberIsMetrized) {
  const auto& m = model22();
  int a = m.index_of(blown_point::fiber(0.0)), b = m.index_of(blown_point::fiber(0.5));
  auto v = rho_tilde(m, a, b, 0.2);
  EXPECT_EQ(v.rho1, 0.0);
  EXPECT_GT(v.value, 0.1);
}

TEST(ChainMetric, WeightConstraint) {
  const auto& m = model22();
  EXPECT_THROW(rho_tilde(m, 0, 1, 0.3), parameter_error);
  EXPECT_THROW(contraction_certificate(m, 4, 0.25), parameter_error);
  EXPECT_LT(default_weight(m) * 4, 1.0);
  EXPECT_GT(rho_tilde(m, 0, 1, 0.2).tail_bound, 0.0);
}

TEST(ChainMetric, GrandOrbitCopies) {
  auto m = build_blowup(2, 2, 3, 4);
  double c = 0.1;
  auto v = rho_tilde(m, blown_point::fiber(0.0, 2, 5), blown_point::fiber(0.5, 2, 5), c);
  int a = m.index_of(blown_point::fiber(0.0)), b = m.index_of(blown_point::fiber(0.5));
  EXPECT_NEAR(v.value, c * c * m.rho_A(a, b), 1e-15);
  EXPECT_THROW(rho_tilde(m, blown_point::fiber(0.0, 2, 5), blown_point::fiber(0.0, 2, 6), c), domain_error);
  EXPECT_THROW(rho_tilde(m, blown_point::fiber(0.0, 2, 5), blown_point::fiber(0.1, 2, 5), 0.2), parameter_error);
}

TEST(ChainMetric, ContractionOnSectors) {
  const auto& m = model22();
  auto v = sector_contractions(m, 60, 11);
  ASSERT_GE(v.size(), 30u);
  for (auto& s : v) EXPECT_LE(s.ratio, 1 / m.lambda + 1e-9) << s.ring << " " << s.theta0;
}

TEST(ChainMetric, ContractionOnSectorsNonIntegerLambda) {
  auto m = build_blowup(2.5, 2, 0, 6, {.depth = 7});
  for (auto& s : sector_contractions(m, 30, 2)) EXPECT_LE(s.ratio, 1 / 2.5 + 1e-9);
}

TEST(Certificate, DecaysOnReferenceInstance) {
  const auto& m = model22();
  auto r = contraction_certificate(m, 8, 0.2);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.alpha_fit, 0.0);
  ASSERT_EQ(r.levels.size(), 9u);
  for (auto& L : r.levels) {
    EXPECT_EQ(L.dichotomy_failures, 0u) << L.level;
    EXPECT_EQ(L.copy_bound, 0.0);  // d_loc = D: the grand orbit of p is {p}
    if (!std::isnan(L.max_ratio)) {
      EXPECT_LE(L.max_ratio, 1 / m.lambda + 0.05) << L.level;
    }
  }
  EXPECT_LT(r.levels[8].max_rho_tilde, r.levels[0].max_rho_tilde / 10);
}

TEST(Certificate, CopiesEnterTheBound) {
  auto m = build_blowup(2, 2, 3, 6);
  auto r = contraction_certificate(m, 6, default_weight(m));
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.strong_weight);
  for (auto& L : r.levels) EXPECT_GT(L.copy_bound, 0.0);
}

TEST(FrinkBlowup, SandwichAndContraction) {
  const auto& m = model22();
  auto fb = frink_on_blowup(m, 4);
  EXPECT_TRUE(fb.hypotheses.all_ok);
  for (auto& r : fb.omega.rel)
    for (std::size_t i = 0; i < r.size(); i += 97) EXPECT_TRUE(r.test(i, i));
  EXPECT_LT(fb.fit.theta_fit, 1.0);
  // Angles 1/4 and 3/4 of S_p share no arc of the level-0 cover, and their level-4
  // arcs are 3/64 turn wide, so the pair is outside Omega_1 and rho' >= 1/4.
  int a = m.index_of(blown_point::fiber(0.25)), b = m.index_of(blown_point::fiber(0.75));
  EXPECT_FALSE(fb.omega.rel[1].test(a, b));
  EXPECT_GE(fb.metric(a, b), 0.25);
}

TEST(Blowup, Errors) {
  EXPECT_THROW(build_blowup(1.0, 2, 2, 6), parameter_error);
  EXPECT_THROW(build_blowup(2, 1, 2, 6), parameter_error);
  EXPECT_THROW(build_blowup(2, 2, 2, -1), parameter_error);
  EXPECT_THROW(build_blowup(2, 3, 2, 6), parameter_error);
  EXPECT_THROW(model22().index_of(blown_point::chart(0.3, 0)), domain_error);
}
