#pragma once

#include <string>
#include <vector>

#include "common.hpp"
#include "shift_core.hpp"

namespace thermoform {

struct build_options {
  double tol = 1e-12;
  long max_iter = 200000;
  int tail_samples = default_tail_samples;
};

/// Transfer operator on depth-k words with its Perron data.
///
/// The operator acts as (L f)(w) = sum_a exp(phi(a w)) f(a w). States are
/// words of length k indexed by word_index().
struct TransferData {
  int d = 2;
  int k = 1;
  std::int64_t n_states = 0;
  std::vector<double> phi;          // depth-k table of the potential
  double lambda = 0;                // leading eigenvalue
  double pressure = 0;              // log lambda
  std::vector<double> h;            // eigenfunction of L, positive
  std::vector<double> nu;           // eigenmeasure of L*, sums to 1
  std::vector<double> stationary;   // h*nu, sums to 1
  std::vector<double> step_cdf;     // n_states x d cumulative transition probabilities
  std::vector<double> init_cdf;     // cumulative stationary distribution
  double gap_bound = 0;             // var_depth(phi, k); 0 for tables of depth <= k
  long iterations = 0;

  std::int64_t successor(std::int64_t v, int b) const { return (v % (n_states / d)) * d + (b - 1); }
  double transition(std::int64_t v, int b) const {
    double lo = b == 1 ? 0.0 : step_cdf[v * d + b - 2];
    return step_cdf[v * d + b - 1] - lo;
  }
};

namespace detail {

// Power iteration for the Perron vector of M (transpose=false) or of M^T.
// M[v][w] = e^{phi(v)} when w is a successor of v.
inline double perron(const std::vector<double>& ephi, int d, std::int64_t n, bool transpose,
                     std::vector<double>& x, const build_options& opt, long& iters) {
  x.assign(std::size_t(n), 1.0 / double(n));
  std::vector<double> y(static_cast<std::size_t>(n));
  std::int64_t tail = n / d;
  double lam = 0;
  for (long it = 1; it <= opt.max_iter; ++it) {
    if (!transpose) {
      for (std::int64_t v = 0; v < n; ++v) {
        std::int64_t base = (v % tail) * d;
        double s = 0;
        for (int b = 0; b < d; ++b) s += x[base + b];
        y[v] = ephi[v] * s;
      }
    } else {
      for (std::int64_t w = 0; w < n; ++w) {
        std::int64_t base = w / d;
        double s = 0;
        for (int a = 0; a < d; ++a) {
          std::int64_t v = a * tail + base;
          s += ephi[v] * x[v];
        }
        y[w] = s;
      }
    }
    double sum = pairwise_sum(y);
    double xs = pairwise_sum(x);
    lam = sum / xs;
    double res = 0, scale = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      res = std::max(res, std::abs(y[i] - lam * x[i]));
      scale = std::max(scale, std::abs(lam * x[i]));
    }
    for (std::int64_t i = 0; i < n; ++i) x[i] = y[i] / sum;
    iters = it;
    if (res <= opt.tol * scale) return lam;
  }
  throw convergence_error("power iteration did not reach residual " + std::to_string(opt.tol) + " in " +
                          std::to_string(opt.max_iter) + " iterations");
}

}  // namespace detail

inline TransferData build_operator(const Potential& phi, int k, int d, const build_options& opt = {}) {
  if (d != phi.alphabet()) throw input_error("alphabet mismatch");
  if (k < std::max(1, phi.is_table() ? phi.depth() : 1))
    throw input_error("state depth must be at least max(1, table depth)");
  if (double(k) * std::log10(double(d)) > 7.0 + 1e-12 || ipow(d, k) > 10'000'000)
    throw sizing_error("d^k = " + std::to_string(d) + "^" + std::to_string(k) + " exceeds 1e7 states");
  TransferData T;
  T.d = d;
  T.k = k;
  T.n_states = ipow(d, k);
  Potential tab = phi.averaged(k, opt.tail_samples);
  T.phi = tab.table_values();
  T.gap_bound = phi.is_table() ? 0.0 : var_depth(phi, k, opt.tail_samples);

  double pmax = *std::max_element(T.phi.begin(), T.phi.end());
  std::vector<double> ephi(T.phi.size());
  for (std::size_t i = 0; i < ephi.size(); ++i) ephi[i] = std::exp(T.phi[i] - pmax);

  long it1 = 0, it2 = 0;
  double lam_r = detail::perron(ephi, d, T.n_states, false, T.nu, opt, it1);
  double lam_l = detail::perron(ephi, d, T.n_states, true, T.h, opt, it2);
  (void)lam_l;
  T.iterations = std::max(it1, it2);
  T.lambda = lam_r * std::exp(pmax);
  T.pressure = std::log(lam_r) + pmax;

  double hn = 0;
  for (std::int64_t i = 0; i < T.n_states; ++i) hn += T.h[i] * T.nu[i];
  for (auto& x : T.h) x /= hn;
  T.stationary.resize(std::size_t(T.n_states));
  for (std::int64_t i = 0; i < T.n_states; ++i) T.stationary[i] = T.h[i] * T.nu[i];

  T.init_cdf.resize(std::size_t(T.n_states));
  std::partial_sum(T.stationary.begin(), T.stationary.end(), T.init_cdf.begin());
  T.step_cdf.resize(std::size_t(T.n_states * d));
  for (std::int64_t v = 0; v < T.n_states; ++v) {
    double acc = 0;
    double denom = 0;
    for (int b = 1; b <= d; ++b) denom += T.nu[T.successor(v, b)];
    for (int b = 1; b <= d; ++b) {
      acc += T.nu[T.successor(v, b)] / denom;
      T.step_cdf[v * d + b - 1] = acc;
    }
    T.step_cdf[v * d + d - 1] = 1.0;
  }
  return T;
}

inline double pressure(const TransferData& T) { return T.pressure; }

/// mu_phi(C(eta)).
inline double gibbs_cylinder_measure(const TransferData& T, const ShiftWord& eta) {
  if (eta.alphabet() != T.d) throw input_error("alphabet mismatch");
  std::size_t n = eta.depth();
  if (n == 0) return 1.0;
  if (n < std::size_t(T.k)) {
    std::int64_t block = ipow(T.d, T.k - int(n));
    std::int64_t start = word_index(eta.data(), int(n), T.d) * block;
    double s = 0;
    for (std::int64_t i = 0; i < block; ++i) s += T.stationary[start + i];
    return s;
  }
  std::int64_t v = word_index(eta.data(), T.k, T.d);
  double m = T.stationary[v];
  for (std::size_t i = std::size_t(T.k); i < n; ++i) {
    m *= T.transition(v, eta.data()[i]);
    v = T.successor(v, eta.data()[i]);
  }
  return m;
}

/// Depth-k table of an observable for use with T.
inline std::vector<double> state_table(const TransferData& T, const Potential& psi, int samples = default_tail_samples) {
  if (psi.alphabet() != T.d) throw input_error("alphabet mismatch");
  if (psi.is_table() && psi.depth() > T.k)
    throw input_error("observable depth " + std::to_string(psi.depth()) + " exceeds state depth " + std::to_string(T.k));
  return psi.averaged(T.k, samples).table_values();
}

inline double expectation(const TransferData& T, const std::vector<double>& f) {
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = T.stationary[i] * f[i];
  return pairwise_sum(t);
}

inline double expectation(const TransferData& T, const Potential& psi) { return expectation(T, state_table(T, psi)); }

/// (P g)(v) = E[g(X_1) | X_0 = v] for the stationary Markov chain on states.
inline std::vector<double> apply_transition(const TransferData& T, const std::vector<double>& g) {
  std::vector<double> out(g.size());
  for (std::int64_t v = 0; v < T.n_states; ++v) {
    double s = 0;
    for (int b = 1; b <= T.d; ++b) s += T.transition(v, b) * g[T.successor(v, b)];
    out[v] = s;
  }
  return out;
}

/// h = P - int phi d mu_phi.
inline double equilibrium_entropy(const TransferData& T, const Potential& phi) {
  return T.pressure - expectation(T, state_table(T, phi));
}

struct sigma2_report {
  double value = 0;
  long terms = 0;
  bool clamped = false;
  double mean = 0;
};

inline sigma2_report sigma_squared_report(const TransferData& T, const Potential& psi, double truncation_tol = 1e-14,
                                          long max_terms = 100000) {
  if (truncation_tol <= 0) throw input_error("truncation tolerance must be positive");
  auto f = state_table(T, psi);
  sigma2_report r;
  r.mean = expectation(T, f);
  for (auto& x : f) x -= r.mean;
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = T.stationary[i] * f[i] * f[i];
  double sum = pairwise_sum(t);
  auto g = f;
  int small = 0;
  long j = 0;
  while (small < 3) {
    if (++j > max_terms) throw convergence_error("Green-Kubo series not decaying within budget");
    g = apply_transition(T, g);
    for (std::size_t i = 0; i < f.size(); ++i) t[i] = T.stationary[i] * f[i] * g[i];
    double c = pairwise_sum(t);
    sum += 2 * c;
    small = std::abs(c) < truncation_tol ? small + 1 : 0;
  }
  r.terms = j;
  if (sum < 0) {
    if (sum < -1e-10) throw convergence_error("negative asymptotic variance " + std::to_string(sum));
    sum = 0;
    r.clamped = true;
  }
  r.value = sum;
  return r;
}

inline double sigma_squared(const TransferData& T, const Potential& psi, double truncation_tol = 1e-14) {
  return sigma_squared_report(T, psi, truncation_tol).value;
}

/// int psi (chi o sigma^n) dmu - int psi dmu int chi dmu.
inline double correlation(const TransferData& T, const Potential& psi, const Potential& chi, long n) {
  if (n < 0) throw input_error("negative lag");
  auto f = state_table(T, psi);
  auto g = state_table(T, chi);
  double mf = expectation(T, f), mg = expectation(T, g);
  for (auto& x : g) x -= mg;
  for (long j = 0; j < n; ++j) g = apply_transition(T, g);
  for (auto& x : f) x -= mf;
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = T.stationary[i] * f[i] * g[i];
  return pairwise_sum(t);
}

struct ld_rate_result {
  double rate = 0;
  double tilt_mean = 0;
  double pressure_tilted = 0;
  double pressure_base = 0;
};

/// rate = -t int psi dmu_{phi+t psi} + P(phi + t psi) - P(phi).
inline ld_rate_result ld_rate(const Potential& phi, const Potential& psi, double t, int k,
                              const build_options& opt = {}) {
  int d = phi.alphabet();
  auto base = build_operator(phi, k, d, opt);
  auto tilted = build_operator(phi.plus(psi.scaled(t)), k, d, opt);
  ld_rate_result r;
  r.pressure_base = base.pressure;
  r.pressure_tilted = tilted.pressure;
  r.tilt_mean = expectation(tilted, psi);
  r.rate = -t * r.tilt_mean + r.pressure_tilted - r.pressure_base;
  return r;
}

/// Markov sampler of mu_phi on state sequences.
class GibbsSampler {
 public:
  explicit GibbsSampler(const TransferData& T) : T_(&T) {}

  std::int64_t initial(stream_rng& g) const {
    double u = g.uniform();
    auto it = std::upper_bound(T_->init_cdf.begin(), T_->init_cdf.end(), u);
    std::int64_t v = it - T_->init_cdf.begin();
    return std::min(v, T_->n_states - 1);
  }

  /// Draws the next symbol b from state v; returns it and advances v.
  int step(std::int64_t& v, stream_rng& g) const {
    double u = g.uniform();
    const double* c = &T_->step_cdf[v * T_->d];
    int b = 1;
    while (b < T_->d && u >= c[b - 1]) ++b;
    v = T_->successor(v, b);
    return b;
  }

  /// Fills out[0..len) with a Gibbs-distributed word (len >= k).
  void word(stream_rng& g, int* out, std::size_t len) const {
    std::int64_t v = initial(g);
    auto w = index_word(v, T_->k, T_->d);
    std::size_t k = std::size_t(T_->k);
    for (std::size_t i = 0; i < std::min(k, len); ++i) out[i] = w[i];
    for (std::size_t i = k; i < len; ++i) out[i] = step(v, g);
  }

  const TransferData& data() const { return *T_; }

 private:
  const TransferData* T_;
};

inline ShiftWord sample_gibbs(const TransferData& T, std::size_t length, std::uint64_t seed) {
  if (length < std::size_t(T.k)) throw input_error("sample length shorter than state depth");
  std::vector<int> w(length);
  stream_rng g(seed, 0);
  GibbsSampler(T).word(g, w.data(), length);
  return ShiftWord(T.d, std::move(w));
}

}  // namespace thermoform
