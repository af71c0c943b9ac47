#pragma once

#include <functional>
#include <map>

#include "coding.hpp"
#include "thermo.hpp"

namespace thermoform {

/// Real function on the ambient space of a system.
struct Observable {
  std::string name = "zero";
  std::function<double(point)> f = [](point) { return 0.0; };
  double operator()(point x) const { return f(x); }
};

inline Observable make_observable(const std::string& name, double amplitude = 1.0) {
  if (name == "zero") return {"zero", [](point) { return 0.0; }};
  if (name == "constant") return {"constant", [amplitude](point) { return amplitude; }};
  if (name == "cos2pi") return {"cos2pi", [amplitude](point x) { return amplitude * std::cos(2 * pi * x.real()); }};
  if (name == "sin2pi") return {"sin2pi", [amplitude](point x) { return amplitude * std::sin(2 * pi * x.real()); }};
  if (name == "re") return {"re", [amplitude](point x) { return amplitude * x.real(); }};
  if (name == "abs2") return {"abs2", [amplitude](point x) { return amplitude * std::norm(x); }};
  throw input_error("unknown observable '" + name + "'");
}

/// u o f - u.
inline Observable coboundary(system_ptr sys, Observable u) {
  return {"coboundary(" + u.name + ")", [sys, u](point x) { return u(sys->forward(x)) - u(x); }};
}

inline Observable difference(Observable a, Observable b) {
  return {a.name + "-" + b.name, [a, b](point x) { return a(x) - b(x); }};
}

inline Observable sum(Observable a, Observable b) {
  return {a.name + "+" + b.name, [a, b](point x) { return a(x) + b(x); }};
}

struct periodic_set {
  int k = 1;
  std::vector<std::vector<point>> orbits;  // cycles with minimal period dividing k
  std::size_t word_count = 0;              // d^k symbolic seeds
  std::size_t point_count = 0;             // distinct periodic points found
};

namespace detail {

// Word index is minimal among its rotations.
inline bool necklace(std::int64_t idx, int k, int d) {
  auto w = index_word(idx, k, d);
  for (int r = 1; r < k; ++r) {
    std::rotate(w.begin(), w.begin() + 1, w.end());
    if (word_index(w.data(), k, d) < idx) return false;
  }
  return true;
}

// Fixed point of the inverse-branch chain that follows the orbit guess backwards.
inline std::vector<point> close_orbit(const System& s, std::vector<point> orbit, int max_iter = 200) {
  int k = int(orbit.size());
  for (int it = 0; it < max_iter; ++it) {
    std::vector<point> next(k);
    point y = orbit[0];
    for (int i = k - 1; i >= 0; --i) {
      point best{};
      double bd = std::numeric_limits<double>::infinity();
      for (auto& p : s.inverse_branches(y)) {
        double e = s.dist(p.z, orbit[i]);
        if (e < bd) bd = e, best = p.z;
      }
      next[i] = best;
      y = best;
    }
    double moved = 0;
    for (int i = 0; i < k; ++i) moved = std::max(moved, s.dist(next[i], orbit[i]));
    orbit = std::move(next);
    if (moved < 1e-15) break;
  }
  return orbit;
}

}  // namespace detail

/// Periodic orbits whose period divides k.
inline periodic_set periodic_points(const CodingTree& t, int k) {
  if (k < 1) throw input_error("period must be at least 1");
  const System& s = *t.sys;
  int d = t.alphabet();
  periodic_set out;
  out.k = k;
  out.word_count = std::size_t(ipow(d, k));
  if (ipow(d, k) > 1'000'000) throw sizing_error("too many periodic words");
  if (auto* c = dynamic_cast<const CircleD*>(&s)) {
    // (d^k - 1) x in Z; orbits by exact integer arithmetic.
    std::int64_t q = ipow(c->degree(), k) - 1;
    std::vector<char> seen(std::size_t(q), 0);
    for (std::int64_t j = 0; j < q; ++j) {
      if (seen[j]) continue;
      std::vector<point> orb;
      for (std::int64_t x = j; !seen[x]; x = (x * c->degree()) % q) {
        seen[x] = 1;
        orb.emplace_back(double(x) / double(q), 0.0);
      }
      out.orbits.push_back(std::move(orb));
    }
    out.point_count = std::size_t(q);
    return out;
  }
  std::vector<point> found;
  int depth = std::max(3 * k, 24);
  for (std::int64_t idx = 0; idx < ipow(d, k); ++idx) {
    if (!detail::necklace(idx, k, d)) continue;
    auto w = index_word(idx, k, d);
    std::vector<int> a;
    while (int(a.size()) < depth + 1) a.insert(a.end(), w.begin(), w.end());
    point z = code_point(t, ShiftWord(d, a), depth).z;
    auto orbit = detail::close_orbit(s, forward_orbit(s, z, std::size_t(k)));
    // Reduce to the minimal period.
    int m = k;
    for (int p = 1; p < k; ++p)
      if (k % p == 0 && s.dist(orbit[p], orbit[0]) < 1e-9) {
        m = p;
        break;
      }
    orbit.resize(std::size_t(m));
    if (s.dist(s.forward(orbit[m - 1]), orbit[0]) > 1e-9)
      throw convergence_error("periodic orbit for word " + ShiftWord(d, w).to_string() + " did not close");
    bool dup = false;
    for (point f : found)
      if (s.dist(f, orbit[0]) < 1e-9) dup = true;
    if (dup) continue;
    found.insert(found.end(), orbit.begin(), orbit.end());
    out.orbits.push_back(std::move(orbit));
  }
  out.point_count = found.size();
  return out;
}

inline periodic_set periodic_points(system_ptr sys, int k) {
  return periodic_points(build_tree(sys, propose_basepoint(*sys)), k);
}

inline double orbit_sum(const Observable& eta, const std::vector<point>& orbit) {
  std::vector<double> v;
  for (point p : orbit) v.push_back(eta(p));
  return pairwise_sum(v);
}

struct obstruction_report {
  double K = 0;
  double max_residual = 0;
  std::size_t orbits = 0;
  std::vector<point> witness_high, witness_low;  // orbits with largest and smallest S/k
  double high_average = 0, low_average = 0;
  std::string verdict;  // "coboundary-candidate" or "not-coboundary"
};

/// Residual max |S_k eta(p) - k K| over periodic orbits of period up to K_max, K the mean of S/k.
inline obstruction_report periodic_obstruction(const CodingTree& t, const Observable& eta, int K_max,
                                               double tol = 1e-10) {
  if (K_max < 1) throw input_error("K_max must be at least 1");
  struct orbit_value {
    std::vector<point> orbit;
    double S;
  };
  std::vector<orbit_value> all;
  std::vector<point> seen;
  for (int k = 1; k <= K_max; ++k)
    for (auto& o : periodic_points(t, k).orbits) {
      if (int(o.size()) != k) continue;  // counted at its minimal period
      all.push_back({o, orbit_sum(eta, o)});
    }
  obstruction_report r;
  r.orbits = all.size();
  double acc = 0;
  for (auto& o : all) acc += o.S / double(o.orbit.size());
  r.K = acc / double(all.size());
  std::size_t hi = 0, lo = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    double k = double(all[i].orbit.size());
    r.max_residual = std::max(r.max_residual, std::abs(all[i].S - k * r.K));
    if (all[i].S / k > all[hi].S / double(all[hi].orbit.size())) hi = i;
    if (all[i].S / k < all[lo].S / double(all[lo].orbit.size())) lo = i;
  }
  r.witness_high = all[hi].orbit;
  r.witness_low = all[lo].orbit;
  r.high_average = all[hi].S / double(all[hi].orbit.size());
  r.low_average = all[lo].S / double(all[lo].orbit.size());
  r.verdict = r.max_residual < tol ? "coboundary-candidate" : "not-coboundary";
  return r;
}

struct holder_fit {
  double C = 0, exponent = 0;
  std::size_t pairs = 0;
};

struct transfer_solution {
  std::vector<point> orbit;  // x_n with f(x_n) = x_{n+1}
  std::vector<double> u;     // u(x_0) = 0, u(x_{n+1}) = u(x_n) + eta(x_n)
  double max_relation_error = 0;
  double discrepancy = std::numeric_limits<double>::quiet_NaN();  // circle orbits only
  holder_fit reference;  // in the system metric
  holder_fit symbolic;   // in the shift metric on backward itineraries
};

namespace detail {

inline holder_fit fit_holder(const std::vector<double>& logr, const std::vector<double>& logdu) {
  holder_fit h;
  h.pairs = logr.size();
  if (logr.size() < 2) return h;
  auto f = least_squares(logr, logdu);
  h.exponent = f.slope;
  double c = 0;
  for (std::size_t i = 0; i < logr.size(); ++i) c = std::max(c, logdu[i] - h.exponent * logr[i]);
  h.C = std::exp(c);
  return h;
}

}  // namespace detail

/// Tabulates u along an orbit by u(f x) = u(x) + eta(x). The orbit is built
/// backwards from a sample point with random inverse branches, which keeps it
/// exact to rounding and generic.
inline transfer_solution solve_transfer(const System& s, const Observable& eta, std::size_t orbit_length,
                                        std::uint64_t seed) {
  if (orbit_length < 2) throw input_error("orbit length must be at least 2");
  std::size_t N = orbit_length;
  transfer_solution out;
  out.orbit.resize(N);
  std::vector<std::uint8_t> branch(N, 0);
  stream_rng g(seed, 0);
  out.orbit[N - 1] = s.repellor_sample(1, seed)[0];
  for (std::size_t n = N - 1; n-- > 0;) {
    auto pre = s.inverse_branches(out.orbit[n + 1]);
    std::size_t b = std::size_t(g() % pre.size());
    out.orbit[n] = pre[b].z;
    branch[n] = std::uint8_t(b);
  }
  out.u.resize(N);
  out.u[0] = 0;
  double eta_max = 0;
  for (std::size_t n = 0; n + 1 < N; ++n) {
    double e = eta(out.orbit[n]);
    eta_max = std::max(eta_max, std::abs(e));
    out.u[n + 1] = out.u[n] + e;
    double threshold = 10 * (1 + eta_max) * std::log(double(n + 2));
    if (n + 2 >= 16 && std::abs(out.u[n + 1]) > threshold)
      throw divergence_error("partial sums reach " + std::to_string(out.u[n + 1]) + " after " +
                             std::to_string(n + 1) + " steps, above 10(1+max|eta|)log n");
  }
  for (std::size_t n = 0; n + 1 < N; ++n) {
    double rel = std::abs(out.u[n + 1] - out.u[n] - eta(out.orbit[n]));
    double drift = s.dist(s.forward(out.orbit[n]), out.orbit[n + 1]);
    out.max_relation_error = std::max({out.max_relation_error, rel, drift});
  }
  if (s.ambient_dimension() == 1) {
    std::vector<double> bins(64, 0.0);
    for (point p : out.orbit) bins[std::min<std::size_t>(63, std::size_t(p.real() * 64))] += 1.0 / double(N);
    double disc = 0;
    for (double b : bins) disc = std::max(disc, std::abs(b - 1.0 / 64));
    out.discrepancy = disc;
  }

  // Reference metric: neighbours in a sort by position.
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto pa = out.orbit[a], pb = out.orbit[b];
    return pa.real() != pb.real() ? pa.real() < pb.real() : pa.imag() < pb.imag();
  });
  std::vector<double> lr, ld;
  for (std::size_t i = 0; i + 1 < N; ++i)
    for (std::size_t lag = 1; lag <= 4 && i + lag < N; ++lag) {
      std::size_t a = order[i], b = order[i + lag];
      double r = s.dist(out.orbit[a], out.orbit[b]);
      double du = std::abs(out.u[a] - out.u[b]);
      if (r >= 1e-6 && r <= 1e-1 && du > 0) {
        lr.push_back(std::log(r));
        ld.push_back(std::log(du));
      }
    }
  out.reference = detail::fit_holder(lr, ld);

  // Shift metric 2^-r on itineraries (branch choices from index n onward).
  const std::size_t L = 40;
  std::vector<std::size_t> sym;
  for (std::size_t n = 0; n + L < N; ++n) sym.push_back(n);
  std::sort(sym.begin(), sym.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(branch.begin() + a, branch.begin() + a + L, branch.begin() + b,
                                        branch.begin() + b + L);
  });
  lr.clear();
  ld.clear();
  for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
    std::size_t a = sym[i], b = sym[i + 1];
    std::size_t r = 0;
    while (r < L && branch[a + r] == branch[b + r]) ++r;
    double du = std::abs(out.u[a] - out.u[b]);
    if (r < L && r >= 4 && du > 0) {
      lr.push_back(-double(r + 1) * std::log(2.0));
      ld.push_back(std::log(du));
    }
  }
  out.symbolic = detail::fit_holder(lr, ld);
  return out;
}

/// eta o pi as a depth-k table, averaging over tail completions.
inline Potential encode_observable(const CodingTree& t, const Observable& eta, int k,
                                   int samples = default_tail_samples, int window = 0) {
  int d = t.alphabet();
  if (window <= 0) window = t.sys->has_exact_coding() ? default_truncation : k + 24;
  auto f = Potential::formula(
      d, [&t, eta](const int* w, std::size_t n) { return eta(code_fast(t, w, n)); }, 0, 1, "encoded:" + eta.name,
      window);
  return f.averaged(k, samples);
}

struct cohomologous_report {
  obstruction_report obstruction;
  double max_cylinder_gap = 0;  // over all depth-3 cylinders, extrapolated in the encoding depth
  double raw_cylinder_gap = 0;  // same at encoding depth k without extrapolation
  bool measures_agree = false;
  std::string verdict;  // "cohomologous-candidate" or "not-cohomologous"
};

namespace detail {

// Depth-3 Gibbs cylinder masses of the encoded observable at depth k.
inline std::vector<double> depth3_masses(const CodingTree& t, const Observable& phi, int k) {
  int d = t.alphabet();
  auto T = build_operator(encode_observable(t, phi, k), k, d);
  std::vector<double> m;
  for (std::int64_t i = 0; i < ipow(d, 3); ++i) m.push_back(gibbs_cylinder_measure(T, ShiftWord(d, index_word(i, 3, d))));
  return m;
}

}  // namespace detail

/// Encoding error in the masses decays like theta^k; depths k-1 and k are
/// combined by Richardson extrapolation before comparing.
inline cohomologous_report cohomologous_test(const CodingTree& t, const Observable& phi1, const Observable& phi2,
                                             int K_max, int k = 13, double tol = 1e-10) {
  if (k < 4) throw input_error("encoding depth must be at least 4");
  cohomologous_report r;
  r.obstruction = periodic_obstruction(t, difference(phi1, phi2), K_max, tol);
  r.verdict = r.obstruction.verdict == "coboundary-candidate" ? "cohomologous-candidate" : "not-cohomologous";
  double th = t.theta;
  auto extrapolate = [&](const Observable& phi, std::vector<double>& raw) {
    auto prev = detail::depth3_masses(t, phi, k - 1);
    raw = detail::depth3_masses(t, phi, k);
    std::vector<double> m(raw.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = (raw[i] - th * prev[i]) / (1 - th);
    return m;
  };
  std::vector<double> raw1, raw2;
  auto m1 = extrapolate(phi1, raw1);
  auto m2 = extrapolate(phi2, raw2);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    r.max_cylinder_gap = std::max(r.max_cylinder_gap, std::abs(m1[i] - m2[i]));
    r.raw_cylinder_gap = std::max(r.raw_cylinder_gap, std::abs(raw1[i] - raw2[i]));
  }
  r.measures_agree = r.max_cylinder_gap < 1e-6;
  return r;
}

struct shadow_result {
  std::vector<point> orbit;  // p, f(p), ..., f^{l-1}(p)
  double closing_distance = 0;  // rho(z, f^l z)
  double period_error = 0;      // rho(f^l p, p)
  double birkhoff_gap = 0;      // |S_l eta(p) - S_l eta(z)|
  double max_tracking_ratio = 0;  // max_h rho(f^h p, f^h z) / (theta^(l-h) rho(z, f^l z))
};

/// Periodic point of period l shadowing the almost-closed orbit of z.
inline shadow_result periodic_shadow(const System& s, const Observable& eta, point z, int l, double tol = 1e-10,
                                     double radius = -1) {
  if (l < 1) throw input_error("period must be at least 1");
  if (radius < 0) radius = 0.25 / s.degree();
  auto zo = forward_orbit(s, z, std::size_t(l) + 1);
  shadow_result r;
  r.closing_distance = s.dist(z, zo[l]);
  if (r.closing_distance > radius)
    throw domain_error("rho(z, f^l z) = " + std::to_string(r.closing_distance) + " exceeds the closing radius " +
                       std::to_string(radius));
  std::vector<point> guess(zo.begin(), zo.begin() + l);
  r.orbit = detail::close_orbit(s, guess);
  r.period_error = s.dist(s.forward(r.orbit[l - 1]), r.orbit[0]);
  if (r.period_error > tol) throw convergence_error("shadowing orbit did not close within tolerance");
  double sp = 0, sz = 0;
  for (int h = 0; h < l; ++h) {
    sp += eta(r.orbit[h]);
    sz += eta(zo[h]);
    if (r.closing_distance > 0) {
      double ratio = s.dist(r.orbit[h], zo[h]) / (std::pow(s.contraction(), l - h) * r.closing_distance);
      r.max_tracking_ratio = std::max(r.max_tracking_ratio, ratio);
    }
  }
  r.birkhoff_gap = std::abs(sp - sz);
  return r;
}

}  // namespace thermoform
