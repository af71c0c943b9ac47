#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "thermoform/thermo.hpp"

using namespace thermoform;

namespace {

Potential coin(int d = 2) { return Potential::first_symbol(d, {1.0, -1.0}); }
const std::vector<double> markov2 = {0.4, -0.9, 0.2, 1.1};  // depth-2 table on two symbols

}  // namespace

TEST(BuildOperator, ZeroPotential) {
  auto T = build_operator(Potential::constant(2, 0), 1, 2);
  EXPECT_NEAR(T.lambda, 2.0, 1e-12);
  EXPECT_NEAR(T.stationary[0], 0.5, 1e-12);
  EXPECT_NEAR(T.stationary[1], 0.5, 1e-12);
  auto T3 = build_operator(Potential::constant(3, 0), 2, 3);
  EXPECT_NEAR(T3.lambda, 3.0, 1e-12);
  for (double p : T3.stationary) EXPECT_NEAR(p, 1.0 / 9, 1e-12);
}

TEST(BuildOperator, DepthOneTableMatchesWordSum) {
  std::vector<double> a = {std::log(1.0), std::log(2.0)};
  auto T = build_operator(Potential::first_symbol(2, a), 1, 2);
  EXPECT_NEAR(T.lambda, 3.0, 1e-12);
  EXPECT_NEAR(pressure(T), oracle::word_sum_pressure(a, 2, 1, 12), 1e-10);
}

TEST(BuildOperator, DepthTwoMatchesOracles) {
  auto T = build_operator(Potential::table(2, 2, markov2), 2, 2);
  EXPECT_NEAR(pressure(T), oracle::two_state_pressure(markov2), 1e-10);
  // Word sums converge like O(1/n).
  EXPECT_NEAR(pressure(T), oracle::word_sum_pressure(markov2, 2, 2, 16), 0.2);
}

TEST(BuildOperator, InvariantsAndErrors) {
  auto T = build_operator(Potential::table(2, 2, markov2), 3, 2);
  double s = 0;
  for (std::size_t i = 0; i < T.h.size(); ++i) {
    EXPECT_GT(T.h[i], 0);
    s += T.stationary[i];
  }
  EXPECT_NEAR(s, 1.0, 1e-10);
  EXPECT_THROW(build_operator(Potential::constant(2, 0), 24, 2), sizing_error);
  EXPECT_THROW(build_operator(Potential::table(2, 2, markov2), 1, 2), input_error);
  build_options tiny;
  tiny.max_iter = 2;
  EXPECT_THROW(build_operator(Potential::table(2, 2, markov2), 2, 2, tiny), convergence_error);
}

TEST(Pressure, ConstantShift) {
  auto phi = Potential::table(2, 2, markov2);
  auto T0 = build_operator(phi, 2, 2);
  auto T1 = build_operator(phi.shifted(0.7), 2, 2);
  EXPECT_NEAR(pressure(T1) - pressure(T0), 0.7, 1e-10);
  EXPECT_NEAR(pressure(build_operator(Potential::constant(2, 0.7), 1, 2)), std::log(2.0) + 0.7, 1e-12);
  std::mt19937_64 g(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<int> v(1 + g() % 6);
    for (auto& x : v) x = 1 + int(g() % 2);
    ShiftWord w(2, v);
    EXPECT_NEAR(gibbs_cylinder_measure(T0, w), gibbs_cylinder_measure(T1, w), 1e-10);
  }
}

TEST(Gibbs, Examples) {
  auto T0 = build_operator(Potential::constant(2, 0), 1, 2);
  EXPECT_NEAR(gibbs_cylinder_measure(T0, ShiftWord(2, {1})), 0.5, 1e-12);
  auto T = build_operator(Potential::first_symbol(2, {0.0, std::log(2.0)}), 1, 2);
  EXPECT_NEAR(gibbs_cylinder_measure(T, ShiftWord(2, {2})), 2.0 / 3, 1e-12);
  EXPECT_EQ(gibbs_cylinder_measure(T, ShiftWord(2, {})), 1.0);
  // Bernoulli product structure.
  EXPECT_NEAR(gibbs_cylinder_measure(T, ShiftWord(2, {2, 1, 2})), 4.0 / 27, 1e-12);
}

TEST(Gibbs, Additivity) {
  auto T = build_operator(Potential::table(3, 2, {0.1, 0.5, -0.3, 1.0, 0.0, 0.2, -0.7, 0.4, 0.9}), 3, 3);
  std::mt19937_64 g(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> v(g() % 7);
    for (auto& x : v) x = 1 + int(g() % 3);
    ShiftWord w(3, v);
    double s = 0;
    for (int b = 1; b <= 3; ++b) s += gibbs_cylinder_measure(T, w.extended(b));
    EXPECT_NEAR(s, gibbs_cylinder_measure(T, w), 1e-12);
  }
}

TEST(Gibbs, ShiftInvariance) {
  auto T = build_operator(Potential::table(2, 2, markov2), 2, 2);
  // mu(C(w)) = sum_a mu(C(a w)).
  for (auto v : std::vector<std::vector<int>>{{1}, {2, 1}, {1, 1, 2}, {2, 2, 1, 2}}) {
    ShiftWord w(2, v);
    double s = 0;
    for (int a = 1; a <= 2; ++a) {
      std::vector<int> aw = {a};
      aw.insert(aw.end(), v.begin(), v.end());
      s += gibbs_cylinder_measure(T, ShiftWord(2, aw));
    }
    EXPECT_NEAR(s, gibbs_cylinder_measure(T, w), 1e-12);
  }
}

TEST(Entropy, Examples) {
  auto z = Potential::constant(2, 0);
  EXPECT_NEAR(equilibrium_entropy(build_operator(z, 1, 2), z), std::log(2.0), 1e-12);
  std::vector<double> a = {0.0, std::log(2.0)};
  auto phi = Potential::first_symbol(2, a);
  double expect = oracle::shannon_entropy(oracle::bernoulli(a));
  EXPECT_NEAR(equilibrium_entropy(build_operator(phi, 1, 2), phi), expect, 1e-12);
  EXPECT_NEAR(expect, std::log(3.0) - 2.0 / 3 * std::log(2.0), 1e-12);
  auto c = Potential::constant(2, -std::log(2.0));
  EXPECT_NEAR(equilibrium_entropy(build_operator(c, 1, 2), c), std::log(2.0), 1e-12);
}

TEST(SigmaSquared, Examples) {
  auto T = build_operator(Potential::constant(2, 0), 1, 2);
  EXPECT_NEAR(sigma_squared(T, Potential::constant(2, 3.0)), 0.0, 1e-14);
  EXPECT_NEAR(sigma_squared(T, coin()), 1.0, 1e-12);
  auto u = Potential::table(2, 2, {0.3, -0.2, 1.0, 0.1});
  auto Tm = build_operator(Potential::table(2, 2, markov2), 3, 2);
  EXPECT_LT(sigma_squared(Tm, u.coboundary()), 1e-8);
  EXPECT_THROW(sigma_squared(T, coin(), 0.0), input_error);
}

TEST(SigmaSquared, MatchesSecondDerivativeOfPressure) {
  auto phi = Potential::table(2, 2, markov2);
  auto psi = Potential::table(2, 2, {1.0, -0.5, 0.3, 0.8});
  auto T = build_operator(phi, 2, 2);
  double h = 1e-2;
  auto P = [&](double t) { return pressure(build_operator(phi.plus(psi.scaled(t)), 2, 2)); };
  double fd = (P(h) - 2 * P(0) + P(-h)) / (h * h);
  EXPECT_NEAR(sigma_squared(T, psi), fd, 1e-4);
}

TEST(Correlation, Examples) {
  auto T = build_operator(Potential::constant(2, 0), 2, 2);
  auto psi = coin();
  auto chi = Potential::first_symbol(2, {0.3, 2.0});
  EXPECT_GE(correlation(T, psi, psi, 0), 0.0);
  for (int n = 1; n < 6; ++n) EXPECT_EQ(correlation(T, psi, chi, n), 0.0);
  auto Tm = build_operator(Potential::table(2, 2, markov2), 2, 2);
  for (int n = 0; n < 6; ++n) EXPECT_NEAR(correlation(Tm, psi, Potential::constant(2, 4.0), n), 0.0, 1e-15);
}

TEST(Correlation, DecaysAtTwoStateSpectralRate) {
  auto Tm = build_operator(Potential::table(2, 2, markov2), 2, 2);
  auto psi = coin();
  double ratio = correlation(Tm, psi, psi, 6) / correlation(Tm, psi, psi, 5);
  EXPECT_NEAR(-std::log(std::abs(ratio)), oracle::two_state_decay_rate(markov2), 1e-8);
}

TEST(LdRate, Examples) {
  auto z = Potential::constant(2, 0);
  auto r0 = ld_rate(z, coin(), 0.0, 1);
  EXPECT_EQ(r0.rate, 0.0);
  EXPECT_NEAR(r0.tilt_mean, 0.0, 1e-14);
  auto r1 = ld_rate(z, coin(), 1.0, 1);
  EXPECT_NEAR(r1.pressure_tilted, std::log(std::exp(1.0) + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(r1.tilt_mean, std::tanh(1.0), 1e-12);
  EXPECT_NEAR(r1.rate, oracle::coin_ld_rate(1.0), 1e-12);
  EXPECT_LE(r1.rate, 0.0);
  double h = 1e-4;
  EXPECT_NEAR((ld_rate(z, coin(), h, 1).rate - ld_rate(z, coin(), -h, 1).rate) / (2 * h), 0.0, 1e-6);
}

TEST(LdRate, FiniteDifferencesBracketTiltMean) {
  auto phi = Potential::table(2, 2, markov2);
  auto psi = Potential::table(2, 2, {1.0, -0.5, 0.3, 0.8});
  double h = 1e-3;
  for (double t : {-1.0, 0.0, 0.5}) {
    auto P = [&](double s) { return pressure(build_operator(phi.plus(psi.scaled(s)), 2, 2)); };
    double fd = (P(t + h) - P(t - h)) / (2 * h);
    EXPECT_NEAR(ld_rate(phi, psi, t, 2).tilt_mean, fd, 1e-4);
    EXPECT_GE(P(t + h) + P(t - h) - 2 * P(t), -1e-12);
  }
}

TEST(DepthRefinement, IdenticalOutputs) {
  auto phi = Potential::table(2, 2, markov2);
  auto A = build_operator(phi, 2, 2), B = build_operator(phi, 3, 2);
  EXPECT_NEAR(pressure(A), pressure(B), 1e-10);
  EXPECT_NEAR(equilibrium_entropy(A, phi), equilibrium_entropy(B, phi), 1e-10);
  auto psi = coin();
  EXPECT_NEAR(sigma_squared(A, psi), sigma_squared(B, psi), 1e-10);
  for (auto v : std::vector<std::vector<int>>{{1}, {1, 2}, {2, 2, 1}, {1, 2, 1, 1}})
    EXPECT_NEAR(gibbs_cylinder_measure(A, ShiftWord(2, v)), gibbs_cylinder_measure(B, ShiftWord(2, v)), 1e-10);
}

TEST(SampleGibbs, Frequencies) {
  auto T = build_operator(Potential::constant(2, 0), 1, 2);
  auto w = sample_gibbs(T, 100000, 42);
  double f1 = double(std::count(w.symbols().begin(), w.symbols().end(), 1)) / 1e5;
  EXPECT_GE(f1, 0.495);
  EXPECT_LE(f1, 0.505);
  EXPECT_EQ(sample_gibbs(T, 1000, 7), sample_gibbs(T, 1000, 7));
  auto T2 = build_operator(Potential::first_symbol(2, {0.0, std::log(2.0)}), 1, 2);
  auto w2 = sample_gibbs(T2, 100000, 43);
  double f2 = double(std::count(w2.symbols().begin(), w2.symbols().end(), 2)) / 1e5;
  EXPECT_NEAR(f2, 2.0 / 3, 0.01);
  EXPECT_THROW(sample_gibbs(build_operator(Potential::constant(2, 0), 3, 2), 2, 1), input_error);
}

TEST(SampleGibbs, MarkovPairFrequencies) {
  auto T = build_operator(Potential::table(2, 2, markov2), 2, 2);
  auto w = sample_gibbs(T, 200000, 5);
  for (auto v : std::vector<std::vector<int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}) {
    double count = 0;
    for (std::size_t i = 0; i + 1 < w.depth(); ++i) count += w.symbols()[i] == v[0] && w.symbols()[i + 1] == v[1];
    EXPECT_NEAR(count / double(w.depth() - 1), gibbs_cylinder_measure(T, ShiftWord(2, v)), 0.006);
  }
}

TEST(FormulaPotential, GapBoundReported) {
  auto f = builtin_formula(2, "cos2pi");
  auto T = build_operator(f, 8, 2);
  EXPECT_GT(T.gap_bound, 0.0);
  EXPECT_LE(T.gap_bound, 2 * pi * std::pow(2.0, -8));
  // cos(2 pi x) has zero Lebesgue mean; the zero-potential measure is Lebesgue.
  auto T0 = build_operator(Potential::constant(2, 0), 8, 2);
  EXPECT_NEAR(expectation(T0, f), 0.0, 1e-3);
}
