#pragma once

#include <cstdio>
#include <fstream>

#include "blowup.hpp"
#include "cohomology.hpp"
#include "config.hpp"
#include "statlab.hpp"

namespace thermoform {

using ojson = nlohmann::ordered_json;

/// Report, CSV text and exit code of one manifest run: 0 PASS, 1 FAIL, 2 input error.
struct run_result {
  ojson report = ojson::object();
  std::string csv;
  int exit_code = 0;
};

namespace detail {

// Floats printed with 15 significant digits; non-finite values as strings.
inline ojson jnum(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return std::strtod(buf, nullptr);
}

inline std::string cnum(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline ojson jpoint(point z) { return ojson::array({jnum(z.real()), jnum(z.imag())}); }

inline ojson jorbit(const std::vector<point>& o) {
  ojson a = ojson::array();
  for (point z : o) a.push_back(jpoint(z));
  return a;
}

inline Potential manifest_potential(const Manifest& m, const std::string& p, int d) {
  std::string kind = m.str(p + ".kind", m.has(p + ".formula") ? "formula" : m.has(p + ".table") ? "table" : "zero");
  if (kind == "zero") return Potential::constant(d, 0);
  if (kind == "constant") return Potential::constant(d, m.number(p + ".value", 0));
  if (kind == "formula") {
    if (!m.has(p + ".formula")) throw input_error("key '" + p + ".formula' is required for formula potentials");
    return builtin_formula(d, m.str(p + ".formula"), m.number(p + ".amplitude", 1));
  }
  auto v = m.list(p + ".table");
  if (v.empty()) throw input_error("key '" + p + ".table' is required for table potentials");
  int k = kind == "first_symbol" ? 1 : int(m.integer(p + ".depth", 1));
  return Potential::table(d, k, v);
}

inline system_spec manifest_system_spec(const Manifest& m) {
  if (!m.has("system.name")) throw input_error("key 'system.name' is required");
  system_spec s;
  s.name = m.str("system.name");
  s.d = int(m.integer("system.d", 2));
  s.eps = m.number("system.eps", 0);
  s.c = point(m.number("system.c_re", 0), m.number("system.c_im", 0));
  s.lambda = m.number("system.lambda", 2);
  return s;
}

inline Observable manifest_observable(const Manifest& m, const std::string& p, const system_ptr& sys) {
  if (!m.has(p + ".name")) throw input_error("key '" + p + ".name' is required");
  auto o = make_observable(m.str(p + ".name"), m.number(p + ".amplitude", 1));
  if (m.flag(p + ".coboundary")) o = coboundary(sys, o);
  return o;
}

inline double observable_lipschitz(const Manifest& m, const std::string& p) {
  if (m.has(p + ".lipschitz")) return m.number(p + ".lipschitz", 0);
  double a = std::abs(m.number(p + ".amplitude", 1));
  auto n = m.str(p + ".name");
  if (n == "cos2pi" || n == "sin2pi") return 2 * pi * a;
  if (n == "zero" || n == "constant") return 0;
  return a;
}

inline std::vector<long> to_longs(const std::vector<double>& v, const std::string& what) {
  std::vector<long> out;
  for (double x : v) {
    if (x != std::floor(x)) throw input_error(what + " must be integers");
    out.push_back(long(x));
  }
  return out;
}

inline int operator_depth(const Manifest& m, std::initializer_list<const Potential*> ps) {
  int k = 1;
  for (auto* p : ps) k = std::max(k, p->is_table() ? p->depth() : 8);
  return int(m.integer("depth", k));
}

inline const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

inline void run_thermo(const Manifest& m, const std::string& op, run_result& r) {
  int d = int(m.integer("d", 2));
  auto phi = manifest_potential(m, "potential", d);
  auto psi = m.has("observable.kind") || m.has("observable.table") || m.has("observable.formula")
                 ? manifest_potential(m, "observable", d)
                 : phi;
  int k = operator_depth(m, {&phi, &psi});
  build_options bo;
  bo.tol = m.number("tol", bo.tol);
  auto T = build_operator(phi, k, d, bo);
  auto s2 = sigma_squared_report(T, psi);
  auto& j = r.report;
  j["operation"] = op;
  j["d"] = d;
  j["depth"] = k;
  j["pressure"] = jnum(T.pressure);
  j["entropy"] = jnum(equilibrium_entropy(T, phi));
  j["mean"] = jnum(s2.mean);
  j["sigma2"] = jnum(s2.value);
  j["gap_bound"] = jnum(T.gap_bound);
  j["tol"] = jnum(bo.tol);
  j["iterations"] = T.iterations;
  if (op == "gibbs") {
    r.csv = "word,measure\n";
    for (std::int64_t v = 0; v < T.n_states; ++v) {
      auto w = index_word(v, k, d);
      ShiftWord sw(d, w);
      r.csv += "\"" + sw.to_string() + "\"," + cnum(gibbs_cylinder_measure(T, sw)) + "\n";
    }
    if (m.has("word")) {
      auto w = to_longs(m.list("word"), "word symbols");
      ShiftWord sw(d, std::vector<int>(w.begin(), w.end()));
      j["word"] = sw.to_string();
      j["cylinder_measure"] = jnum(gibbs_cylinder_measure(T, sw));
    }
  } else if (op == "ldrate") {
    r.csv = "t,rate,tilt_mean,pressure_tilted\n";
    ojson rows = ojson::array();
    for (double t : m.list("t", {1.0})) {
      auto l = ld_rate(phi, psi, t, k, bo);
      rows.push_back({{"t", jnum(t)}, {"rate", jnum(l.rate)}, {"tilt_mean", jnum(l.tilt_mean)},
                      {"pressure_tilted", jnum(l.pressure_tilted)}});
      r.csv += cnum(t) + "," + cnum(l.rate) + "," + cnum(l.tilt_mean) + "," + cnum(l.pressure_tilted) + "\n";
    }
    j["rates"] = rows;
  } else if (op == "sigma2") {
    j["sigma2_terms"] = s2.terms;
    j["sigma2_clamped"] = s2.clamped;
  }
}

inline void run_code(const Manifest& m, run_result& r) {
  auto sys = make_system(manifest_system_spec(m));
  auto tree = build_tree(sys, propose_basepoint(*sys));
  auto& j = r.report;
  j["operation"] = "code";
  j["system"] = sys->name();
  j["alphabet"] = tree.alphabet();
  if (m.has("word")) {
    auto w = to_longs(m.list("word"), "word symbols");
    ShiftWord a(tree.alphabet(), std::vector<int>(w.begin(), w.end()));
    int n = int(m.integer("depth", long(w.size()) - 1));
    auto c = code_point(tree, a, n);
    j["word"] = a.to_string();
    j["depth"] = n;
    j["point"] = jpoint(c.z);
    j["tail_bound"] = jnum(c.tail_bound);
  }
  bool pass = true;
  if (long g = m.integer("grid", 0); g > 0) {
    int depth = int(m.integer("depth", 12));
    auto grid = sys->repellor_sample(int(g), std::uint64_t(m.integer("seed", 1)));
    auto cov = surjectivity_coverage(tree, grid, depth);
    j["coverage"] = jnum(cov.fraction);
    j["grid_spacing"] = jnum(cov.spacing);
    if (!cov.advisory.empty()) j["advisory"] = cov.advisory;
    pass = cov.fraction == 1.0;
    r.csv = "grid_point,nearest_word,distance\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::string w;
      for (int s : cov.nearest_word[i]) w += (w.empty() ? "" : ",") + std::to_string(s);
      r.csv += "\"" + cnum(grid[i].real()) + " " + cnum(grid[i].imag()) + "\",\"" + w + "\"," +
               cnum(cov.distance[i]) + "\n";
    }
  }
  j["verdict"] = verdict(pass);
  r.exit_code = pass ? 0 : 1;
}

inline CoverComplex manifest_complex(const Manifest& m, system_ptr sys) {
  int levels = int(m.integer("levels", 8));
  std::vector<point> pts;
  cover_level U0;
  if (m.has("cover.input")) {
    std::ifstream f(m.str("cover.input"));
    if (!f) throw input_error("cannot read cover document '" + m.str("cover.input") + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(f);
      for (auto& p : doc.at("points")) pts.emplace_back(p.at(0).get<double>(), p.size() > 1 ? p.at(1).get<double>() : 0.0);
      for (auto& e : doc.at("cover")) U0.push_back(e.get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
      throw input_error(std::string("cover document: ") + e.what());
    }
    for (auto& e : U0)
      for (int i : e)
        if (i < 0 || i >= int(pts.size())) throw input_error("cover document: index " + std::to_string(i) + " out of range");
  } else {
    pts = sys->repellor_sample(int(m.integer("points", 2000)), std::uint64_t(m.integer("seed", 1)));
    U0 = default_initial_cover(*sys, pts);
  }
  return pullback_cover(sys, pts, U0, levels);
}

inline void run_cover(const Manifest& m, run_result& r) {
  auto sys = make_system(manifest_system_spec(m));
  auto cc = manifest_complex(m, sys);
  auto ex = expansion_check(cc);
  auto& j = r.report;
  j["operation"] = "cover";
  j["system"] = sys->name();
  j["points"] = cc.points.size();
  j["spacing"] = jnum(cc.spacing);
  j["dropped"] = cc.dropped;
  j["theta"] = jnum(ex.theta);
  j["C"] = jnum(ex.C);
  j["warnings"] = cc.warnings;
  j["verdict"] = verdict(ex.pass);
  r.csv = "level,elements,max_diam_rho\n";
  for (std::size_t n = 0; n < cc.levels.size(); ++n)
    r.csv += std::to_string(n) + "," + std::to_string(cc.levels[n].size()) + "," + cnum(ex.diameters[n]) + "\n";
  r.exit_code = ex.pass ? 0 : 1;
}

inline void run_frink(const Manifest& m, run_result& r) {
  auto sys = make_system(manifest_system_spec(m));
  auto cc = manifest_complex(m, sys);
  auto leb = lebesgue_number(*sys, cc.points, cc.levels[0], cc.spacing);
  auto diam = level_diameters(cc);
  int M = int(m.integer("M", 0));
  if (M <= 0) M = choose_block_length(diam, leb.eta);
  auto& j = r.report;
  j["operation"] = "frink";
  j["system"] = sys->name();
  j["points"] = cc.points.size();
  j["eta"] = jnum(leb.eta);
  j["M"] = M;
  auto om = build_omega(cc, M, leb.eta);
  auto chk = verify_frink_hypotheses(om);
  j["triple_composition"] = chk.all_ok;
  j["first_failure"] = chk.first_failure;
  if (!chk.all_ok) {
    j["verdict"] = "FAIL";
    r.exit_code = 1;
    return;
  }
  bool sandwich = true;
  FrinkMetric fm;
  try {
    fm = frink_metric(om);
  } catch (const construction_error& e) {
    sandwich = false;
    j["sandwich_error"] = e.what();
  }
  j["sandwich"] = sandwich;
  if (!sandwich) {
    j["verdict"] = "FAIL";
    r.exit_code = 1;
    return;
  }
  auto fit = contraction_report(fm, cc);
  bool bound = true;
  r.csv = "level,max_diam_rho,max_diam_frink,pass\n";
  for (std::size_t n = 0; n < fit.diameters.size(); ++n) {
    bool ok = fit.diameters[n] <= 2 * std::pow(2.0, -double(n) / M);
    bound = bound && ok;
    r.csv += std::to_string(n) + "," + cnum(diam[n]) + "," + cnum(fit.diameters[n]) + "," + (ok ? "1" : "0") + "\n";
  }
  j["theta_fit"] = jnum(fit.theta_fit);
  j["C_fit"] = jnum(fit.C_fit);
  j["theta_bound"] = jnum(fit.theta_bound);
  j["diameter_bound"] = bound;
  bool pass = fit.pass && bound;
  j["verdict"] = verdict(pass);
  r.exit_code = pass ? 0 : 1;
}

inline void run_blowup(const Manifest& m, run_result& r) {
  blowup_options opt;
  opt.k0 = int(m.integer("blowup.k0", 3));
  auto bm = build_blowup(m.number("blowup.lambda", 2), int(m.integer("blowup.dloc", 2)),
                         int(m.integer("blowup.ambient_degree", 0)), int(m.integer("blowup.n_trunc", 6)), opt);
  double c = m.has("blowup.c") ? m.number("blowup.c", 0) : default_weight(bm);
  int levels = int(m.integer("levels", 8));
  auto cert = contraction_certificate(bm, levels, c);
  auto fb = frink_on_blowup(bm, int(m.integer("M", 4)), levels);
  auto& j = r.report;
  j["operation"] = "blowup";
  j["lambda"] = jnum(bm.lambda);
  j["d_loc"] = bm.d_loc;
  j["ambient_degree"] = bm.D;
  j["sample_points"] = bm.size();
  j["blowdown_defect"] = jnum(blowdown_defect(bm));
  j["c"] = jnum(cert.c);
  j["strong_weight"] = cert.strong_weight;
  j["alpha_fit"] = jnum(cert.alpha_fit);
  j["C_fit"] = jnum(cert.C_fit);
  j["tail_bound"] = jnum(truncation_tail(bm, c));
  double worst_ratio = 0;
  for (auto& L : cert.levels)
    if (!std::isnan(L.max_ratio)) worst_ratio = std::max(worst_ratio, L.max_ratio);
  j["max_sector_ratio"] = jnum(worst_ratio);
  j["ratio_bound"] = jnum(1 / bm.lambda + 0.05);
  j["frink_triple_composition"] = fb.hypotheses.all_ok;
  j["frink_theta_fit"] = jnum(fb.fit.theta_fit);
  j["frink_theta_bound"] = jnum(fb.fit.theta_bound);
  bool pass = cert.pass && fb.hypotheses.all_ok && fb.fit.pass && worst_ratio <= 1 / bm.lambda + 0.05;
  j["verdict"] = verdict(pass);
  r.csv = "level,max_diam_rho_tilde,max_diam_frink\n";
  for (std::size_t n = 0; n < cert.levels.size(); ++n)
    r.csv += std::to_string(n) + "," + cnum(cert.levels[n].certified) + "," +
             (n < fb.fit.diameters.size() ? cnum(fb.fit.diameters[n]) : std::string("nan")) + "\n";
  r.exit_code = pass ? 0 : 1;
}

inline void run_cohom(const Manifest& m, run_result& r) {
  auto sys = make_system(manifest_system_spec(m));
  auto tree = build_tree(sys, propose_basepoint(*sys));
  auto eta = manifest_observable(m, "eta", sys);
  int kmax = int(m.integer("kmax", 8));
  double tol = m.number("tol", 1e-10);
  auto ob = periodic_obstruction(tree, eta, kmax, tol);
  auto& j = r.report;
  j["operation"] = "cohom";
  j["system"] = sys->name();
  j["eta"] = eta.name;
  j["K"] = jnum(ob.K);
  j["max_residual"] = jnum(ob.max_residual);
  j["tol"] = jnum(tol);
  j["orbits"] = ob.orbits;
  j["verdict"] = ob.verdict;
  j["witness_orbit"] = jorbit(ob.witness_high);
  j["witness_orbit_low"] = jorbit(ob.witness_low);
  j["witness_averages"] = ojson::array({jnum(ob.high_average), jnum(ob.low_average)});
  if (m.has("eta2.name")) {
    auto eta2 = manifest_observable(m, "eta2", sys);
    auto c = cohomologous_test(tree, eta, eta2, kmax);
    j["eta2"] = eta2.name;
    j["cohomologous"] = c.verdict;
    j["max_cylinder_gap"] = jnum(c.max_cylinder_gap);
    j["raw_cylinder_gap"] = jnum(c.raw_cylinder_gap);
  }
}

inline ojson stat_json(const stat_report& s) {
  ojson j;
  j["law"] = law_name(s.which);
  j["route"] = s.route;
  j["N"] = s.N;
  j["n"] = s.n;
  j["seed"] = s.seed;
  j["sigma2"] = jnum(s.sigma2);
  j["mean"] = jnum(s.mean);
  j["statistic"] = jnum(s.statistic);
  j["predicted"] = jnum(s.predicted);
  ojson tol = ojson::object();
  for (auto& [k, v] : s.tolerances) tol[k] = jnum(v);
  j["tolerances"] = tol;
  j["empirical_mean"] = jnum(s.empirical_mean);
  j["mean_band"] = jnum(s.mean_band);
  j["mean_ok"] = s.mean_ok;
  j["verdict"] = verdict(s.pass);
  if (!s.note.empty()) j["note"] = s.note;
  if (!s.edc.empty()) {
    ojson rows = ojson::array();
    for (auto& e : s.edc)
      rows.push_back({{"lag", e.lag}, {"exact", jnum(e.exact)}, {"empirical", jnum(e.empirical)},
                      {"error_bar", jnum(e.error_bar)}, {"agree", e.agree}});
    j["correlations"] = rows;
  }
  if (!s.ld.empty()) {
    ojson rows = ojson::array();
    for (auto& e : s.ld)
      rows.push_back({{"t", jnum(e.t)}, {"threshold", jnum(e.threshold)}, {"rate", jnum(e.rate)},
                      {"empirical", jnum(e.empirical)}, {"probability", jnum(e.probability)},
                      {"expected_hits", jnum(e.expected_hits)}, {"tolerance", jnum(e.tolerance)},
                      {"mode", e.mode}, {"pass", e.pass}});
    j["rates"] = rows;
  }
  return j;
}

inline std::string stat_csv(const stat_report& s) {
  std::string c;
  if (s.which == law::edc) {
    c = "lag,exact,empirical,error_bar\n";
    for (auto& e : s.edc) c += std::to_string(e.lag) + "," + cnum(e.exact) + "," + cnum(e.empirical) + "," + cnum(e.error_bar) + "\n";
  } else if (s.which == law::ld) {
    c = "t,threshold,rate,empirical,probability,mode\n";
    for (auto& e : s.ld)
      c += cnum(e.t) + "," + cnum(e.threshold) + "," + cnum(e.rate) + "," + cnum(e.empirical) + "," +
           cnum(e.probability) + "," + e.mode + "\n";
  } else {
    c = s.which == law::clt ? "sample,normalized_sum\n" : "sample,max_lil_ratio\n";
    for (std::size_t i = 0; i < s.raw.size(); ++i) c += std::to_string(i) + "," + cnum(s.raw[i]) + "\n";
  }
  return c;
}

inline void run_statlab(const Manifest& m, run_result& r) {
  if (!m.has("law")) throw input_error("key 'law' is required");
  law which = parse_law(m.str("law"));
  law_params p;
  p.seed = std::uint64_t(m.integer("seed", 1));
  p.n = m.integer("n", which == law::ld ? 200 : 1000);
  p.N = m.integer("N", which == law::lil ? 1000 : 100000);
  p.n_max = m.integer("n_max", 10000);
  p.lags = to_longs(m.list("lags", {1, 2, 3, 4, 5}), "lags");
  p.t_grid = m.list("t", {-1, 1});
  p.ld.mode = m.str("mode", "auto");
  p.clt.ks_tol = m.number("ks_tol", p.clt.ks_tol);
  auto& j = r.report;
  j["operation"] = "statlab";
  if (m.has("system.name")) {
    auto sys = make_system(manifest_system_spec(m));
    auto tree = build_tree(sys, propose_basepoint(*sys));
    int d = tree.alphabet();
    auto phi = manifest_potential(m, "potential", d);
    auto eta = manifest_observable(m, "eta", sys);
    int k = int(m.integer("depth", 10));
    auto T = build_operator(phi, k, d);
    auto pf = pushforward_experiment(tree, T, eta.f, observable_lipschitz(m, "eta"), which, p, &phi);
    j["system"] = sys->name();
    j["eta"] = eta.name;
    j["window"] = jnum(pf.window);
    j["symbolic"] = stat_json(pf.symbolic);
    j["downstairs"] = stat_json(pf.downstairs);
    j["agree"] = pf.agree;
    bool pass = pf.agree && pf.downstairs.pass;
    j["verdict"] = verdict(pass);
    r.csv = stat_csv(pf.downstairs);
    r.exit_code = pass ? 0 : 1;
    return;
  }
  int d = int(m.integer("d", 2));
  auto phi = manifest_potential(m, "potential", d);
  if (!m.has("observable.kind") && !m.has("observable.table") && !m.has("observable.formula"))
    throw input_error("statlab needs an observable (observable.kind)");
  auto psi = manifest_potential(m, "observable", d);
  auto chi = m.has("observable2.kind") || m.has("observable2.table") || m.has("observable2.formula")
                 ? manifest_potential(m, "observable2", d)
                 : psi;
  int k = operator_depth(m, {&phi, &psi, &chi});
  stat_report s;
  if (which == law::ld) {
    p.ld.k = k;
    s = ld_experiment(phi, psi, p.t_grid, p.n, p.N, p.seed, p.ld);
  } else {
    auto T = build_operator(phi, k, d);
    if (which == law::clt) s = clt_experiment(T, psi, p.n, p.N, p.seed, p.clt);
    if (which == law::lil) s = lil_experiment(T, psi, p.n_max, p.N, p.seed, p.lil);
    if (which == law::edc) s = edc_experiment(T, psi, chi, p.lags, p.N, p.seed, p.edc);
  }
  auto sj = stat_json(s);
  for (auto& [key, v] : sj.items()) j[key] = v;
  r.csv = stat_csv(s);
  r.exit_code = s.pass ? 0 : 1;
}

inline void run_selftest(run_result& r) {
  ojson checks = ojson::array();
  bool all = true;
  auto check = [&](const std::string& name, bool ok, double value) {
    checks.push_back({{"name", name}, {"pass", ok}, {"value", jnum(value)}});
    all = all && ok;
  };
  for (int d : {2, 3, 4}) {
    double p = build_operator(Potential::constant(d, 0), 1, d).pressure;
    check("pressure_zero_d" + std::to_string(d), std::abs(p - std::log(double(d))) < 1e-10, p);
  }
  for (const char* name : {"circle_2", "circle_3", "circle_perturbed", "quadratic_julia"}) {
    system_spec s;
    s.name = name;
    s.eps = 0.05;
    s.c = -0.1;
    bool ok = true;
    try {
      self_test(*make_system(s));
    } catch (const error&) {
      ok = false;
    }
    check(std::string("system_") + name, ok, ok ? 0 : 1);
  }
  {
    auto tree = build_tree(make_system({"circle_2"}), 0.0);
    ShiftWord a(2, {2, 1, 2, 2, 1, 1, 2, 1, 2, 2, 2, 1, 1, 1, 2, 1, 2, 1, 1, 2, 2});
    double gap = detail::circle_gap(code_point(tree, a, 20).z.real(), tree.sys->exact_code(a.data(), a.depth()).real());
    check("code_point_circle_2", gap <= tree.tail_bound(20), gap);
  }
  {
    auto T = build_operator(Potential::constant(2, 0), 1, 2);
    auto s = clt_experiment(T, Potential::first_symbol(2, {1, -1}), 1000, 4000, 1, {.ks_tol = 0.05});
    check("clt_coin_small", s.pass, s.statistic);
  }
  r.report["operation"] = "selftest";
  r.report["checks"] = checks;
  r.report["verdict"] = verdict(all);
  r.exit_code = all ? 0 : 1;
}

}  // namespace detail

/// Executes the manifest's operation. Input problems become exit code 2 with the
/// message in report["error"].
inline run_result run(const Manifest& m) {
  run_result r;
  try {
    if (!m.has("operation")) throw input_error("key 'operation' is required");
    std::string op = m.str("operation");
    if (op == "pressure" || op == "gibbs" || op == "sigma2" || op == "ldrate")
      detail::run_thermo(m, op, r);
    else if (op == "code")
      detail::run_code(m, r);
    else if (op == "cover")
      detail::run_cover(m, r);
    else if (op == "frink")
      detail::run_frink(m, r);
    else if (op == "blowup")
      detail::run_blowup(m, r);
    else if (op == "cohom")
      detail::run_cohom(m, r);
    else if (op == "statlab")
      detail::run_statlab(m, r);
    else
      detail::run_selftest(r);
  } catch (const input_error& e) {
    r = {};
    r.report["error"] = e.what();
    r.exit_code = 2;
  } catch (const parameter_error& e) {
    r = {};
    r.report["error"] = e.what();
    r.exit_code = 2;
  } catch (const feasibility_error& e) {
    r = {};
    r.report["error"] = e.what();
    r.exit_code = 2;
  } catch (const error& e) {
    r = {};
    r.report["error"] = e.what();
    r.report["verdict"] = "FAIL";
    r.exit_code = 1;
  }
  return r;
}

}  // namespace thermoform
