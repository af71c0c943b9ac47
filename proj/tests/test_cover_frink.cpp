#include <gtest/gtest.h>

#include <random>

#include "thermoform/cover_frink.hpp"

using namespace thermoform;

namespace {

class IdentityCircle : public System {
 public:
  std::string name() const override { return "identity"; }
  int ambient_dimension() const override { return 1; }
  int degree() const override { return 1; }
  point forward(point x) const override { return x; }
  std::vector<preimage> inverse_branches(point y) const override { return {{1, y}}; }
  double dist(point a, point b) const override { return detail::circle_gap(a.real(), b.real()); }
  std::vector<point> repellor_sample(int n, std::uint64_t) const override {
    std::vector<point> v;
    for (int i = 0; i < n; ++i) v.emplace_back(double(i) / n, 0.0);
    return v;
  }
  double contraction() const override { return 1; }
  singularity_budget budget() const override { return {0.1, 0.5, 0}; }
  std::vector<std::vector<point>> coding_paths(point, double) const override { return {}; }
};

CoverComplex two_arc_complex(int d, int n_points, int levels) {
  auto s = make_system({"circle_" + std::to_string(d)});
  auto pts = s->repellor_sample(n_points, 0);
  auto U0 = arc_cover(pts, {{0.0, 0.6}, {0.5, 1.1}});
  return pullback_cover(s, pts, U0, levels);
}

struct frink_instance {
  CoverComplex cc;
  OmegaRelations om;
  FrinkMetric m;
};

frink_instance doubling_frink(int n_points) {
  auto cc = two_arc_complex(2, n_points, 17);
  double eta = lebesgue_number(*cc.sys, cc.points, cc.levels[0], cc.spacing).eta;
  int M = choose_block_length(level_diameters(cc), eta);
  auto om = build_omega(cc, M, eta);
  auto m = frink_metric(om);
  return {std::move(cc), std::move(om), std::move(m)};
}

}  // namespace

TEST(PullbackCover, DoublingHalvesArcs) {
  auto cc = two_arc_complex(2, 2000, 3);
  ASSERT_EQ(cc.levels.size(), 4u);
  EXPECT_TRUE(cc.invariant_sample);
  EXPECT_EQ(cc.levels[1].size(), 4u);
  for (auto& e : cc.levels[1]) {
    double len = (e.size() + 1) / 2000.0;  // open arc of length 0.3 holds 599 grid points
    EXPECT_NEAR(len, 0.3, 1e-12);
  }
  for (std::size_t n = 1; n < cc.levels.size(); ++n)
    for (std::size_t e = 0; e < cc.levels[n].size(); ++e) {
      int p = cc.refinement[n][e];
      for (int i : cc.levels[n][e]) {
        int img = int(std::lround(cc.sys->forward(cc.points[i]).real() * 2000)) % 2000;
        EXPECT_TRUE(std::binary_search(cc.levels[n - 1][p].begin(), cc.levels[n - 1][p].end(), img));
      }
    }
}

TEST(PullbackCover, ZeroLevelsKeepsCover) {
  auto cc = two_arc_complex(2, 100, 0);
  ASSERT_EQ(cc.levels.size(), 1u);
  EXPECT_EQ(cc.levels[0].size(), 2u);
}

TEST(PullbackCover, DegreeThreeMultipliesElements) {
  auto cc = two_arc_complex(3, 2187, 3);
  EXPECT_EQ(cc.levels[1].size(), 6u);
  EXPECT_EQ(cc.levels[2].size(), 18u);
  EXPECT_EQ(cc.levels[3].size(), 54u);
}

TEST(PullbackCover, RejectsNonCover) {
  auto s = make_system({"circle_2"});
  auto pts = s->repellor_sample(100, 0);
  EXPECT_THROW(pullback_cover(s, pts, arc_cover(pts, {{0.0, 0.5}}), 1), coverage_error);
}

TEST(LebesgueNumber, Examples) {
  auto s = make_system({"circle_2"});
  auto pts = s->repellor_sample(2000, 0);
  cover_level whole{element(2000)};
  std::iota(whole[0].begin(), whole[0].end(), 0);
  EXPECT_NEAR(lebesgue_number(*s, pts, whole).eta, 0.5, 1e-12);
  auto two = lebesgue_number(*s, pts, arc_cover(pts, {{0.0, 0.6}, {0.5, 1.1}}), 1.0 / 2000);
  EXPECT_NEAR(two.eta, 0.05, 1e-12);
  EXPECT_FALSE(two.degenerate);
  cover_level part(2);
  for (int i = 0; i < 2000; ++i) part[i < 1000 ? 0 : 1].push_back(i);
  auto p = lebesgue_number(*s, pts, part, 1.0 / 2000);
  EXPECT_EQ(p.eta, 0.0);
  EXPECT_TRUE(p.degenerate);
  EXPECT_FALSE(p.warning.empty());
}

TEST(ExpansionCheck, DoublingAndTripling) {
  auto r2 = expansion_check(two_arc_complex(2, 2000, 10));
  EXPECT_TRUE(r2.pass);
  EXPECT_NEAR(r2.theta, 0.5, 0.02);
  auto r3 = expansion_check(two_arc_complex(3, 2187, 6));
  EXPECT_TRUE(r3.pass);
  EXPECT_NEAR(r3.theta, 1.0 / 3, 0.02);
}

TEST(ExpansionCheck, IdentityFails) {
  auto s = std::make_shared<IdentityCircle>();
  auto pts = s->repellor_sample(500, 0);
  auto cc = pullback_cover(s, pts, arc_cover(pts, {{0.0, 0.6}, {0.5, 1.1}}), 4);
  auto r = expansion_check(cc);
  EXPECT_FALSE(r.pass);
  EXPECT_THROW(expansion_check(pullback_cover(s, pts, arc_cover(pts, {{0.0, 0.6}, {0.5, 1.1}}), 1)), input_error);
}

TEST(BuildOmega, BlockLengthForTwoArcCover) {
  auto cc = two_arc_complex(2, 2000, 12);
  double eta = lebesgue_number(*cc.sys, cc.points, cc.levels[0], cc.spacing).eta;
  EXPECT_EQ(choose_block_length(level_diameters(cc), eta), 6);
  EXPECT_THROW(build_omega(cc, 4, eta), hypothesis_error);
  auto om = build_omega(cc, 6, eta);
  ASSERT_EQ(om.rel.size(), 2u);
  EXPECT_EQ(om.rel[0], Relation::complete(2000));
  for (auto& r : om.rel)
    for (std::size_t i = 0; i < 2000; ++i) EXPECT_TRUE(r.test(i, i));
  EXPECT_TRUE(om.rel[1].subset_of(om.rel[0]));
}

TEST(VerifyFrink, DiagonalRelationsPass) {
  OmegaRelations om;
  om.rel = {Relation::complete(5), Relation::diagonal(5), Relation::diagonal(5)};
  auto r = verify_frink_hypotheses(om);
  EXPECT_TRUE(r.all_ok);
  EXPECT_TRUE(r.intersection_is_diagonal);
}

TEST(VerifyFrink, ChainThroughFarElementsFails) {
  // Omega_2 links 0-1, 1-2, 2-3, while Omega_1 lacks the pair (0,3).
  OmegaRelations om;
  Relation r1 = Relation::diagonal(6), r2 = Relation::diagonal(6);
  for (int i = 0; i < 3; ++i) r2.set_pair(i, i + 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(i - j) <= 2) r1.set_pair(i, j);
  om.rel = {Relation::complete(6), r1, r2};
  auto r = verify_frink_hypotheses(om);
  EXPECT_FALSE(r.all_ok);
  EXPECT_EQ(r.first_failure, 2);
  EXPECT_TRUE(r.triple_ok[1]);
}

TEST(FrinkMetric, TwoPointSet) {
  OmegaRelations om;
  om.rel = {Relation::complete(2), Relation::diagonal(2)};
  auto m = frink_metric(om);
  // D = 2^-(n+1) with n = 0.
  EXPECT_EQ(m(0, 1), 0.5);
  EXPECT_EQ(m(0, 0), 0.0);
}

TEST(FrinkMetric, DoublingInstance) {
  auto [cc, om, m] = doubling_frink(2000);
  EXPECT_TRUE(verify_frink_hypotheses(om).all_ok);
  auto diam = metric_level_diameters(m, cc);
  for (int n = 0; n < int(diam.size()); ++n) EXPECT_LE(diam[n], 2 * std::pow(2.0, -double(n) / om.M)) << n;
  auto c = contraction_report(m, cc);
  EXPECT_TRUE(c.pass);
  EXPECT_LE(c.theta_fit, std::pow(2.0, -1.0 / 6) + 0.05);
}

TEST(FrinkMetric, MetricAxiomsExhaustive) {
  auto [cc, om, m] = doubling_frink(400);
  std::size_t N = m.n;
  for (std::size_t i = 0; i < N; ++i) {
    EXPECT_EQ(m(i, i), 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      ASSERT_EQ(m(i, j), m(j, i));
      if (i != j) {
        ASSERT_GT(m(i, j), 0.0);
      }
      for (std::size_t k = 0; k < N; ++k) ASSERT_LE(m(i, k), m(i, j) + m(j, k) + 1e-15);
    }
  }
}

TEST(FrinkMetric, PermutationEquivariant) {
  std::mt19937_64 g(5);
  std::size_t N = 40;
  std::vector<Relation> rel{Relation::complete(N), Relation::diagonal(N), Relation::diagonal(N)};
  for (std::size_t i = 0; i + 1 < N; ++i) rel[1].set_pair(i, i + 1);
  for (std::size_t i = 0; i + 1 < N; i += 4) rel[2].set_pair(i, i + 1);
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);
  OmegaRelations a, b;
  a.rel = rel;
  for (auto& r : rel) {
    Relation p(N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (r.test(i, j)) p.set(perm[i], perm[j]);
    b.rel.push_back(p);
  }
  auto ma = frink_metric(a), mb = frink_metric(b);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) EXPECT_EQ(ma(i, j), mb(perm[i], perm[j]));
}

TEST(FrinkMetric, AddingRelationsNeverIncreasesDistance) {
  std::size_t N = 30;
  OmegaRelations a;
  a.rel = {Relation::complete(N), Relation::diagonal(N), Relation::diagonal(N)};
  for (std::size_t i = 0; i + 1 < N; i += 2) a.rel[1].set_pair(i, i + 1);
  auto b = a;
  b.rel[1].set_pair(1, 2);
  b.rel[1].set_pair(5, 6);
  auto ma = frink_metric(a), mb = frink_metric(b);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) EXPECT_LE(mb(i, j), ma(i, j));
}

TEST(ContractionReport, Errors) {
  auto cc = two_arc_complex(2, 100, 0);
  FrinkMetric m;
  m.n = 100;
  m.d.assign(100 * 100, 0.5);
  EXPECT_THROW(contraction_report(m, cc), input_error);
}

TEST(ContractionReport, DegreeThree) {
  auto cc = two_arc_complex(3, 2187, 14);
  double eta = lebesgue_number(*cc.sys, cc.points, cc.levels[0], cc.spacing).eta;
  int M = choose_block_length(level_diameters(cc), eta);
  auto om = build_omega(cc, M, eta);
  EXPECT_TRUE(verify_frink_hypotheses(om).all_ok);
  auto c = contraction_report(frink_metric(om), cc);
  EXPECT_LT(c.theta_fit, 1.0);
}
