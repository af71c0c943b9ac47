#include <gtest/gtest.h>

#include <filesystem>

#include "thermoform/runner.hpp"

using namespace thermoform;

namespace {

std::string data(const std::string& f) { return std::string(TEST_DATA_DIR) + "/" + f; }

}  // namespace

TEST(Manifest, ParsesKeyValueText) {
  auto m = parse_manifest_text("# comment\noperation = pressure\n\nd = 3\npotential.table = 0.5, 0 ,1\n");
  EXPECT_EQ(m.str("operation"), "pressure");
  EXPECT_EQ(m.integer("d", 0), 3);
  EXPECT_EQ(m.list("potential.table"), (std::vector<double>{0.5, 0, 1}));
  EXPECT_EQ(m.str("potential.table"), "[0.5, 0.0, 1.0]");
}

TEST(Manifest, UnknownKeyNamesLineAndKey) {
  try {
    parse_manifest_text("operation = pressure\n\nfoo.bar = 1\n");
    FAIL();
  } catch (const input_error& e) {
    EXPECT_STREQ(e.what(), "line 3: unknown key 'foo.bar'");
  }
}

TEST(Manifest, ValueErrors) {
  EXPECT_THROW(parse_manifest_text("d = 2.5"), input_error);
  EXPECT_THROW(parse_manifest_text("tol = abc"), input_error);
  EXPECT_THROW(parse_manifest_text("operation = fly"), input_error);
  EXPECT_THROW(parse_manifest_text("d = 2\nd = 3"), input_error);
  EXPECT_THROW(parse_manifest_text("just words"), input_error);
  EXPECT_THROW(parse_manifest_text("eta.coboundary = maybe"), input_error);
  EXPECT_THROW(parse_manifest_json("{\"d\": [1, \"x\"]}"), input_error);
  EXPECT_THROW(parse_manifest_json("{\"d\": "), input_error);
}

TEST(Manifest, RoundTripsThroughTextAndJson) {
  auto m = parse_manifest_text(
      "operation = statlab\nlaw = ld\nt = [-1, 1]\ntol = 1e-12\nsystem.c_re = -0.1\neta.coboundary = 1\nseed = 7\n");
  auto again = parse_manifest_text(m.to_text());
  EXPECT_EQ(again, m);
  auto j = m.to_json();
  EXPECT_EQ(j["system"]["c_re"], -0.1);
  EXPECT_EQ(j["eta"]["coboundary"], true);
  EXPECT_EQ(parse_manifest_json(j.dump()), m);
}

TEST(Manifest, LoadsBothFormats) {
  auto a = load_manifest(data("clt_coin.cfg"));
  auto path = std::filesystem::temp_directory_path() / "thermoform_manifest.json";
  std::ofstream(path) << a.to_json().dump(2);
  EXPECT_EQ(load_manifest(path.string()), a);
  EXPECT_THROW(load_manifest(data("unknown_key.cfg")), input_error);
  EXPECT_THROW(load_manifest(data("missing.cfg")), input_error);
}

TEST(Run, PressureOfZeroPotential) {
  auto m = parse_manifest_text("operation = pressure\nd = 2\npotential.kind = zero\n");
  auto r = run(m);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["pressure"].get<double>(), 0.693147180559945);
  EXPECT_NE(r.report.dump().find("\"pressure\":0.693147180559945,"), std::string::npos);
  EXPECT_TRUE(r.report.contains("gap_bound"));
  EXPECT_TRUE(r.report.contains("tol"));
}

TEST(Run, InputErrorsExitTwo) {
  EXPECT_EQ(run(parse_manifest_text("d = 2")).exit_code, 2);
  EXPECT_EQ(run(parse_manifest_text("operation = statlab\nlaw = clt")).exit_code, 2);
  EXPECT_EQ(run(parse_manifest_text("operation = pressure\npotential.kind = table\npotential.table = [1, 2, 3]")).exit_code, 2);
  EXPECT_EQ(run(parse_manifest_text("operation = blowup\nblowup.lambda = 0.5")).exit_code, 2);
}

TEST(Run, IdenticalSeedsGiveIdenticalJson) {
  auto m = parse_manifest_text(
      "operation = statlab\nlaw = clt\nobservable.kind = first_symbol\nobservable.table = [1, -1]\nn = 100\nN = 3000\n"
      "seed = 5\n");
  auto a = run(m), b = run(m);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.csv.substr(0, 22), "sample,normalized_sum\n");
}

TEST(Run, FailingVerdictExitsOne) {
  // A KS threshold of 1e-6 cannot be met with 3000 samples.
  auto m = parse_manifest_text(
      "operation = statlab\nlaw = clt\nobservable.kind = first_symbol\nobservable.table = [1, -1]\nn = 100\nN = 3000\n"
      "ks_tol = 1e-6\n");
  auto r = run(m);
  EXPECT_EQ(r.report["verdict"], "FAIL");
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Run, LdRateRows) {
  auto m = parse_manifest_text(
      "operation = ldrate\npotential.kind = zero\nobservable.kind = first_symbol\nobservable.table = [1, -1]\nt = [1]\n");
  auto r = run(m);
  ASSERT_EQ(r.exit_code, 0);
  double want = -(std::tanh(1.0) - std::log(std::cosh(1.0)));
  EXPECT_NEAR(r.report["rates"][0]["rate"].get<double>(), want, 1e-12);
}

TEST(Run, CohomWitness) {
  auto m = parse_manifest_text("operation = cohom\nsystem.name = circle_2\neta.name = cos2pi\nkmax = 4\n");
  auto r = run(m);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["verdict"], "not-coboundary");
  EXPECT_NEAR(r.report["witness_averages"][0].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r.report["witness_averages"][1].get<double>(), -0.5, 1e-12);
}

TEST(Run, CodeReportsTailBound) {
  auto m = parse_manifest_text("operation = code\nsystem.name = circle_2\nword = 2,1,1,1,1,1,1,1,1,1,1,1\n");
  auto r = run(m);
  ASSERT_EQ(r.exit_code, 0);
  double x = r.report["point"][0].get<double>();
  EXPECT_LE(std::abs(x - 0.5), r.report["tail_bound"].get<double>());
}

TEST(Run, BlowupCsvColumns) {
  auto m = parse_manifest_text("operation = blowup\nblowup.lambda = 2\nblowup.dloc = 2\nblowup.c = 0.2\nlevels = 8\n");
  auto r = run(m);
  EXPECT_EQ(r.exit_code, 0) << r.report.dump(2);
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "level,max_diam_rho_tilde,max_diam_frink");
  EXPECT_EQ(std::count(r.csv.begin(), r.csv.end(), '\n'), 10);
}

TEST(Run, Selftest) { EXPECT_EQ(run(parse_manifest_text("operation = selftest")).exit_code, 0); }
