#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "coding.hpp"
#include "thermo.hpp"

namespace thermoform {

enum class law { clt, lil, edc, ld };

inline std::string law_name(law l) {
  switch (l) {
    case law::clt: return "CLT";
    case law::lil: return "LIL";
    case law::edc: return "EDC";
    case law::ld: return "LD";
  }
  return "?";
}

inline law parse_law(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  if (s == "clt") return law::clt;
  if (s == "lil") return law::lil;
  if (s == "edc") return law::edc;
  if (s == "ld") return law::ld;
  throw input_error("unknown law '" + s + "'");
}

struct edc_row {
  long lag = 0;
  double exact = 0, empirical = 0, error_bar = 0;
  bool agree = false;
};

struct ld_row {
  double t = 0;
  double threshold = 0;  // tilted mean int psi dmu_{phi+t psi}
  double rate = 0;       // formula value
  double empirical = 0;  // (1/n) log of the estimated tail probability
  double probability = 0;
  double expected_hits = 0;  // N e^{n rate} under direct sampling
  double tolerance = 0;
  std::string mode;  // direct | importance
  bool pass = false;
};

/// Outcome of one Monte Carlo law test. Routes: law, dirac (sigma^2 = 0),
/// independent (exact correlations vanish), outside_scope, aborted (weak law failed).
struct stat_report {
  law which = law::clt;
  std::string route = "law";
  long N = 0, n = 0;
  std::uint64_t seed = 0;
  double sigma2 = 0, mean = 0;
  double statistic = 0;
  double predicted = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> tolerances;
  double empirical_mean = 0, mean_band = 0;
  bool mean_ok = true;
  bool pass = false;
  std::string note;
  std::vector<double> raw;  // one statistic per sample (CLT, LIL)
  std::vector<edc_row> edc;
  std::vector<ld_row> ld;
};

inline constexpr double degenerate_sigma2 = 1e-6;

namespace detail {

inline constexpr std::uint64_t pilot_stream = 1ull << 40;

// psi along a path: table observables read the Markov state, formulas read
// a window of symbols.
struct path_observable {
  const Potential* psi = nullptr;
  bool table = false;
  std::vector<double> f;
  int window = 0;

  path_observable(const TransferData& T, const Potential& p) : psi(&p) {
    if (p.alphabet() != T.d) throw input_error("alphabet mismatch");
    table = p.is_table() && p.depth() <= T.k;
    if (table)
      f = state_table(T, p);
    else
      window = p.window();
  }
};

// One path of n steps from the sampler; fills states and symbols
// (symbols only when a formula observable needs them).
struct path_buffer {
  std::vector<std::int64_t> v;
  std::vector<int> w;
};

inline void sample_path(const TransferData& T, long n, int extra_symbols, stream_rng& g, path_buffer& b) {
  GibbsSampler S(T);
  b.v.resize(std::size_t(n));
  std::int64_t v = S.initial(g);
  bool words = extra_symbols > 0;
  if (words) {
    b.w.resize(std::size_t(n + T.k - 1 + extra_symbols));
    auto first = index_word(v, T.k, T.d);
    std::copy(first.begin(), first.end(), b.w.begin());
  }
  std::size_t pos = std::size_t(T.k);
  for (long i = 0; i < n; ++i) {
    b.v[std::size_t(i)] = v;
    if (i + 1 < n || words) {
      int s = S.step(v, g);
      if (words && pos < b.w.size()) b.w[pos++] = s;
    }
  }
  while (words && pos < b.w.size()) b.w[pos++] = S.step(v, g);
}

inline double value_at(const path_observable& o, const path_buffer& b, long i) {
  if (o.table) return o.f[std::size_t(b.v[std::size_t(i)])];
  return (*o.psi)(b.w.data() + i, std::size_t(o.window));
}

inline int extra_for(const TransferData& T, const path_observable& o) {
  return o.table ? 0 : std::max(1, o.window - T.k + 1);
}

// S_n psi for N independent paths, stream i for path i.
inline std::vector<double> birkhoff_samples(const TransferData& T, const Potential& psi, long n, long N,
                                            std::uint64_t seed, std::uint64_t stream0 = 0) {
  path_observable o(T, psi);
  int extra = extra_for(T, o);
  std::vector<double> out(static_cast<std::size_t>(N));
  parallel_for(out.size(), [&](std::size_t i) {
    stream_rng g(seed, stream0 + i);
    thread_local path_buffer b;
    sample_path(T, n, extra, g, b);
    double s = 0;
    for (long j = 0; j < n; ++j) s += value_at(o, b, j);
    out[i] = s;
  });
  return out;
}

inline double sample_sd(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0;
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = (x[i] - mean) * (x[i] - mean);
  return std::sqrt(pairwise_sum(t) / double(x.size() - 1));
}

inline double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

// Weak-law sanity on samples of S_n: |mean(S_n)/n - int psi| within
// 3 max(sigma/sqrt n, sd(S_n)/n)/sqrt N.
inline void weak_law(stat_report& r, const std::vector<double>& S, long n) {
  double m = pairwise_sum(S) / double(S.size());
  double sd = sample_sd(S, m);
  r.empirical_mean = m / double(n);
  r.mean_band = 3 * std::max(std::sqrt(r.sigma2 / double(n)), sd / double(n)) / std::sqrt(double(S.size())) + 1e-12;
  r.mean_ok = std::abs(r.empirical_mean - r.mean) <= r.mean_band;
  r.tolerances["weak_law"] = r.mean_band;
  if (!r.mean_ok) {
    r.route = "aborted";
    r.pass = false;
    r.note = "weak law check failed: empirical mean " + std::to_string(r.empirical_mean) + " vs " +
             std::to_string(r.mean);
  }
}

inline void init_report(stat_report& r, law l, const TransferData& T, const Potential& psi, long n, long N,
                        std::uint64_t seed) {
  if (n < 1 || N < 2) throw input_error("need n >= 1 and N >= 2");
  auto s = sigma_squared_report(T, psi);
  r.which = l;
  r.n = n;
  r.N = N;
  r.seed = seed;
  r.sigma2 = s.value;
  r.mean = s.mean;
}

}  // namespace detail

/// Kolmogorov-Smirnov distance of the sample to Normal(0, sigma^2).
inline double ks_normal(std::vector<double> x, double sigma) {
  if (x.empty()) throw input_error("empty sample");
  std::sort(x.begin(), x.end());
  double n = double(x.size()), D = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = detail::normal_cdf(x[i], sigma);
    D = std::max({D, double(i + 1) / n - F, F - double(i) / n});
  }
  return D;
}

struct clt_options {
  double ks_tol = 0.02;
  double dirac_eps = 0.05;       // threshold on |S_n - n mean| / sqrt n
  double dirac_fraction = 0.01;  // allowed fraction above it
};

/// KS distance of (S_n psi - n mean)/sqrt n to Normal(0, sigma^2); sigma^2 <= 1e-6
/// switches to the Dirac check.
inline stat_report clt_experiment(const TransferData& T, const Potential& psi, long n, long N, std::uint64_t seed,
                                  const clt_options& opt = {}) {
  stat_report r;
  detail::init_report(r, law::clt, T, psi, n, N, seed);
  auto S = detail::birkhoff_samples(T, psi, n, N, seed);
  detail::weak_law(r, S, n);
  if (!r.mean_ok) return r;
  r.raw.resize(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) r.raw[i] = (S[i] - double(n) * r.mean) / std::sqrt(double(n));
  if (r.sigma2 <= degenerate_sigma2) {
    r.route = "dirac";
    long above = std::count_if(r.raw.begin(), r.raw.end(), [&](double z) { return std::abs(z) > opt.dirac_eps; });
    r.statistic = double(above) / double(N);
    r.predicted = 0;
    r.tolerances["dirac_eps"] = opt.dirac_eps;
    r.tolerances["dirac_fraction"] = opt.dirac_fraction;
    r.pass = r.statistic <= opt.dirac_fraction;
    r.note = "sigma^2 = 0: normalized sums should concentrate at 0";
    return r;
  }
  r.statistic = ks_normal(r.raw, std::sqrt(r.sigma2));
  r.predicted = 0;
  r.tolerances["ks"] = opt.ks_tol;
  r.pass = r.statistic < opt.ks_tol;
  return r;
}

struct lil_options {
  double band_lo = 0.6, band_hi = 1.3;
  double degenerate_tol = 0.1;
};

/// Median over samples of max_{n_max/10 <= n <= n_max} |S_n - n mean| / sqrt(n log log n),
/// against sqrt(2 sigma^2). A finite-n band, not a limsup.
inline stat_report lil_experiment(const TransferData& T, const Potential& psi, long n_max, long N,
                                  std::uint64_t seed, const lil_options& opt = {}) {
  if (n_max < 10000) throw input_error("LIL needs n_max >= 10000");
  stat_report r;
  detail::init_report(r, law::lil, T, psi, n_max, N, seed);
  detail::path_observable o(T, psi);
  int extra = detail::extra_for(T, o);
  long n0 = std::max(n_max / 10, 16L);
  std::vector<double> S(static_cast<std::size_t>(N)), best(static_cast<std::size_t>(N));
  double m = r.mean;
  parallel_for(S.size(), [&](std::size_t i) {
    stream_rng g(seed, i);
    thread_local detail::path_buffer b;
    detail::sample_path(T, n_max, extra, g, b);
    double s = 0, c = 0, mx = 0;
    for (long j = 0; j < n_max; ++j) {
      s += detail::value_at(o, b, j);
      c += m;
      long nn = j + 1;
      if (nn >= n0) mx = std::max(mx, std::abs(s - c) / std::sqrt(double(nn) * std::log(std::log(double(nn)))));
    }
    S[i] = s;
    best[i] = mx;
  });
  detail::weak_law(r, S, n_max);
  if (!r.mean_ok) return r;
  r.raw = best;
  std::nth_element(best.begin(), best.begin() + N / 2, best.end());
  r.statistic = best[std::size_t(N / 2)];
  r.predicted = std::sqrt(2 * r.sigma2);
  r.tolerances["band_lo"] = opt.band_lo;
  r.tolerances["band_hi"] = opt.band_hi;
  r.note = "finite-sample band on an almost-sure limsup; heuristic by nature";
  if (r.sigma2 <= degenerate_sigma2) {
    r.route = "outside_scope";
    r.tolerances["degenerate"] = opt.degenerate_tol;
    r.pass = r.statistic <= opt.degenerate_tol;
    r.note = "sigma^2 = 0: outside the scope of the law; statistic should be near 0";
    return r;
  }
  r.pass = r.statistic >= opt.band_lo * r.predicted && r.statistic <= opt.band_hi * r.predicted;
  return r;
}

struct edc_options {
  double sigmas = 3;        // error bar = sigmas * sd / sqrt N
  double zero_tol = 1e-14;  // exact correlations below this count as 0
};

/// Empirical and exact correlations of psi and chi o sigma^n over the lags; fits the
/// decay rate on exact values.
inline stat_report edc_experiment(const TransferData& T, const Potential& psi, const Potential& chi,
                                  std::vector<long> lags, long N, std::uint64_t seed, const edc_options& opt = {}) {
  if (lags.empty()) throw input_error("no lags");
  std::sort(lags.begin(), lags.end());
  if (lags.front() < 0) throw input_error("negative lag");
  long L = lags.back();
  stat_report r;
  detail::init_report(r, law::edc, T, psi, L + 1, N, seed);
  auto Sp = detail::birkhoff_samples(T, psi, L + 1, std::min(N, 100000L), seed, detail::pilot_stream);
  detail::weak_law(r, Sp, L + 1);
  if (!r.mean_ok) return r;

  detail::path_observable op(T, psi), oc(T, chi);
  int extra = std::max(detail::extra_for(T, op), detail::extra_for(T, oc));
  double mp = r.mean, mc = expectation(T, chi);
  std::size_t nl = lags.size();
  std::vector<double> prod(static_cast<std::size_t>(N) * nl);
  parallel_for(std::size_t(N), [&](std::size_t i) {
    stream_rng g(seed, i);
    thread_local detail::path_buffer b;
    detail::sample_path(T, L + 1, extra, g, b);
    double a = detail::value_at(op, b, 0) - mp;
    for (std::size_t j = 0; j < nl; ++j) prod[i * nl + j] = a * (detail::value_at(oc, b, lags[j]) - mc);
  });

  bool all_zero = true, all_agree = true;
  std::vector<double> x, y, col(static_cast<std::size_t>(N));
  for (std::size_t j = 0; j < nl; ++j) {
    for (long i = 0; i < N; ++i) col[std::size_t(i)] = prod[std::size_t(i) * nl + j];
    edc_row e;
    e.lag = lags[j];
    e.exact = correlation(T, psi, chi, lags[j]);
    e.empirical = pairwise_sum(col) / double(N);
    e.error_bar = opt.sigmas * detail::sample_sd(col, e.empirical) / std::sqrt(double(N)) + 1e-12;
    e.agree = std::abs(e.empirical - e.exact) <= e.error_bar;
    all_agree = all_agree && e.agree;
    if (std::abs(e.exact) >= opt.zero_tol) {
      all_zero = false;
      if (e.lag > 0) {
        x.push_back(double(e.lag));
        y.push_back(std::log(std::abs(e.exact)));
      }
    }
    r.edc.push_back(e);
  }
  r.tolerances["sigmas"] = opt.sigmas;
  r.tolerances["zero_tol"] = opt.zero_tol;
  const double inf = std::numeric_limits<double>::infinity();
  bool nonzero_tail = std::any_of(r.edc.begin(), r.edc.end(),
                                  [&](const edc_row& e) { return e.lag > 0 && std::abs(e.exact) >= opt.zero_tol; });
  if (all_zero || !nonzero_tail) {
    r.route = "independent";
    r.statistic = inf;
    r.pass = all_agree;
    r.note = "exact correlations vanish at every positive lag: observables depend on disjoint coordinates "
             "of a Bernoulli or finite-memory process, so the decay rate is infinite";
    return r;
  }
  if (x.size() < 2) {
    // a single nonzero positive lag followed by exact zeros is finite range
    bool later_zero = std::any_of(r.edc.begin(), r.edc.end(),
                                  [&](const edc_row& e) { return e.lag > long(x[0]) && std::abs(e.exact) < opt.zero_tol; });
    r.route = later_zero ? "independent" : "law";
    r.statistic = later_zero ? inf : std::numeric_limits<double>::quiet_NaN();
    r.pass = later_zero && all_agree;
    r.note = later_zero ? "correlations vanish beyond a finite lag" : "need two nonzero lags to fit a rate";
    return r;
  }
  auto fit = least_squares(x, y);
  r.statistic = -fit.slope;
  r.pass = r.statistic > 0 && all_agree;
  return r;
}

struct ld_options {
  std::string mode = "auto";  // auto | direct | importance
  double direct_min_hits = 100;  // auto picks direct when N e^{n rate} reaches this
  double feasible_hits = 10;     // direct below this is refused
  double rel_tol = 0.2;
  double abs_tol_n = 2;  // tolerance |rate| rel_tol + abs_tol_n / n
  int k = 0;             // operator depth; 0 uses the larger potential depth (at least 1)
};

/// Tail rates (1/n) log P(sgn(t) S_n psi >= sgn(t) n m_t), m_t the tilted mean, against
/// the rate formula. Rare events are estimated by sampling mu_{phi+t psi} and weighting
/// with the exact Markov likelihood ratio.
inline stat_report ld_experiment(const Potential& phi, const Potential& psi, const std::vector<double>& t_grid, long n,
                                 long N, std::uint64_t seed, const ld_options& opt = {}) {
  if (t_grid.empty()) throw input_error("empty t grid");
  if (opt.mode != "auto" && opt.mode != "direct" && opt.mode != "importance")
    throw input_error("LD mode must be auto, direct or importance");
  int k = opt.k > 0 ? opt.k : std::max({1, phi.depth(), psi.depth()});
  auto T = build_operator(phi, k, phi.alphabet());
  stat_report r;
  detail::init_report(r, law::ld, T, psi, n, N, seed);
  auto pilot = detail::birkhoff_samples(T, psi, n, std::min(N, 20000L), seed, detail::pilot_stream);
  detail::weak_law(r, pilot, n);
  if (!r.mean_ok) return r;

  r.tolerances["rel_tol"] = opt.rel_tol;
  r.tolerances["abs_tol"] = opt.abs_tol_n / double(n);
  bool all = true;
  double worst = 0;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    double t = t_grid[ti];
    ld_row row;
    row.t = t;
    auto rate = ld_rate(phi, psi, t, k);
    row.rate = rate.rate;
    row.threshold = t == 0 ? r.mean : rate.tilt_mean;
    row.expected_hits = double(N) * std::exp(double(n) * std::min(rate.rate, 0.0));
    row.tolerance = std::abs(row.rate) * opt.rel_tol + opt.abs_tol_n / double(n);
    bool direct = opt.mode == "direct" || (opt.mode == "auto" && row.expected_hits >= opt.direct_min_hits);
    if (opt.mode == "direct" && row.expected_hits < opt.feasible_hits) {
      double need = opt.feasible_hits * std::exp(-double(n) * rate.rate);
      throw feasibility_error("direct LD estimate at t=" + std::to_string(t) + ", n=" + std::to_string(n) +
                              " expects " + std::to_string(row.expected_hits) + " hits; needs N >= " +
                              std::to_string(std::ceil(need)));
    }
    row.mode = direct ? "direct" : "importance";
    double sgn = t < 0 ? -1.0 : 1.0;
    double cut = double(n) * row.threshold;
    double slack = 1e-9 * double(n);
    std::uint64_t stream0 = (ti + 2) << 41;
    std::vector<double> contrib(static_cast<std::size_t>(N));
    if (direct) {
      auto S = detail::birkhoff_samples(T, psi, n, N, seed, stream0);
      for (std::size_t i = 0; i < S.size(); ++i) contrib[i] = sgn * (S[i] - cut) >= -slack ? 1.0 : 0.0;
    } else {
      auto Tt = build_operator(phi.plus(psi.scaled(t)), k, phi.alphabet());
      detail::path_observable o(Tt, psi);
      int extra = detail::extra_for(Tt, o);
      std::vector<double> step_lr(std::size_t(T.n_states * T.d));
      for (std::int64_t v = 0; v < T.n_states; ++v)
        for (int b = 1; b <= T.d; ++b)
          step_lr[std::size_t(v * T.d + b - 1)] = std::log(T.transition(v, b)) - std::log(Tt.transition(v, b));
      parallel_for(contrib.size(), [&](std::size_t i) {
        stream_rng g(seed, stream0 + i);
        thread_local detail::path_buffer b;
        detail::sample_path(Tt, n, extra, g, b);
        double s = 0;
        for (long j = 0; j < n; ++j) s += detail::value_at(o, b, j);
        if (sgn * (s - cut) < -slack) {
          contrib[i] = 0;
          return;
        }
        std::int64_t v0 = b.v[0];
        double lw = std::log(T.stationary[std::size_t(v0)]) - std::log(Tt.stationary[std::size_t(v0)]);
        for (long j = 0; j + 1 < n; ++j) {
          std::int64_t v = b.v[std::size_t(j)], u = b.v[std::size_t(j + 1)];
          lw += step_lr[std::size_t(v * T.d + u % T.d)];
        }
        contrib[i] = std::exp(lw);
      });
    }
    row.probability = pairwise_sum(contrib) / double(N);
    row.empirical = row.probability > 0 ? std::log(row.probability) / double(n)
                                        : -std::numeric_limits<double>::infinity();
    row.pass = std::abs(row.empirical - row.rate) <= row.tolerance;
    all = all && row.pass;
    worst = std::max(worst, std::abs(row.empirical - row.rate));
    r.ld.push_back(row);
  }
  r.statistic = worst;
  r.predicted = 0;
  r.pass = all;
  return r;
}

/// Parameters shared by the pushforward runs.
struct law_params {
  long n = 1000, N = 100000;
  long n_max = 10000;
  std::vector<long> lags = {1, 2, 3, 4, 5};
  std::vector<double> t_grid = {-1, 1};
  std::uint64_t seed = 1;
  clt_options clt;
  lil_options lil;
  edc_options edc;
  ld_options ld;
};

struct pushforward_report {
  stat_report symbolic;    // psi o pi as a depth-k table on the Markov states
  stat_report downstairs;  // psi evaluated on X at pi(sigma^i alpha)
  double window = 0;       // symbols read by pi
  bool agree = false;
};

/// psi_on_X o pi as a formula potential: pi from the first `window` symbols.
inline Potential pushforward_potential(const CodingTree& tree, std::function<double(point)> psi_on_X,
                                       double lipschitz, int window) {
  if (lipschitz < 0) throw input_error("Lipschitz constant must be nonnegative");
  if (!(tree.theta > 0 && tree.theta < 1)) throw input_error("coding tree contraction must lie in (0, 1)");
  double C = lipschitz * tree.C * tree.k / (1 - tree.theta);
  double alpha = std::log2(1 / tree.theta);
  const CodingTree* t = &tree;
  return Potential::formula(
      tree.alphabet(),
      [t, psi_on_X, window](const int* w, std::size_t len) {
        return psi_on_X(code_fast(*t, w, std::min<std::size_t>(len, std::size_t(window))));
      },
      C, alpha, "pushforward", window);
}

/// Runs `which` upstairs on the table approximation of psi o pi and downstairs through
/// the coding map, and compares the two.
inline pushforward_report pushforward_experiment(const CodingTree& tree, const TransferData& T,
                                                 std::function<double(point)> psi_on_X, double lipschitz, law which,
                                                 const law_params& p, const Potential* phi = nullptr) {
  if (T.d != tree.alphabet()) throw input_error("alphabet mismatch between coding tree and operator");
  int window = 8;
  while (window < default_truncation && lipschitz * tree.tail_bound(window - 1) > 1e-10) ++window;
  auto down = pushforward_potential(tree, psi_on_X, lipschitz, window);
  auto up = Potential::table(T.d, T.k, state_table(T, down));
  pushforward_report out;
  out.window = window;
  auto run = [&](const Potential& psi) {
    switch (which) {
      case law::clt: return clt_experiment(T, psi, p.n, p.N, p.seed, p.clt);
      case law::lil: return lil_experiment(T, psi, p.n_max, p.N, p.seed, p.lil);
      case law::edc: return edc_experiment(T, psi, psi, p.lags, p.N, p.seed, p.edc);
      case law::ld: {
        if (!phi) throw input_error("LD pushforward needs the potential phi");
        auto o = p.ld;
        o.k = T.k;
        return ld_experiment(*phi, psi, p.t_grid, p.n, p.N, p.seed, o);
      }
    }
    throw input_error("unknown law");
  };
  out.symbolic = run(up);
  out.downstairs = run(down);
  const auto &a = out.symbolic, &b = out.downstairs;
  out.agree = a.pass == b.pass && a.route == b.route;
  switch (which) {
    case law::clt:
      out.agree = out.agree && std::abs(a.statistic - b.statistic) <= p.clt.ks_tol;
      break;
    case law::lil:
      out.agree = out.agree && std::abs(a.statistic - b.statistic) <= 0.2 * std::max(a.predicted, 1e-12);
      break;
    case law::edc:
      for (std::size_t j = 0; j < a.edc.size(); ++j)
        out.agree = out.agree && std::abs(a.edc[j].empirical - b.edc[j].empirical) <=
                                     a.edc[j].error_bar + b.edc[j].error_bar;
      break;
    case law::ld:
      for (std::size_t j = 0; j < a.ld.size(); ++j)
        out.agree = out.agree && std::abs(a.ld[j].empirical - b.ld[j].empirical) <=
                                     a.ld[j].tolerance + b.ld[j].tolerance;
      break;
  }
  return out;
}

}  // namespace thermoform
