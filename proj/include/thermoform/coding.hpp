#pragma once

#include <random>

#include "shift_core.hpp"
#include "systems.hpp"

namespace thermoform {

struct CodingTree {
  system_ptr sys;
  point w;
  std::vector<point> wi;                   // wi[i-1]: end of path i, f(wi) = w
  std::vector<std::vector<point>> paths;   // paths[i-1] runs from w to wi[i-1]
  double resolution = 0.01;
  double r0 = 0.25;  // radius of the balls counted by k
  int k = 1;         // balls of radius r0 needed to cover the longest path
  double C = 0.5, theta = 0.5;

  int alphabet() const { return int(wi.size()); }
  /// Bound on rho(z_n(alpha), pi(alpha)): sum over m > n of C k theta^m.
  double tail_bound(int n) const { return C * k * std::pow(theta, n + 1) / (1 - theta); }
};

/// Basepoint far from the post-branch set: 0 on circles, the fixed point beta for Julia sets.
inline point propose_basepoint(const System& s) {
  if (auto* j = dynamic_cast<const QuadraticJulia*>(&s)) return j->beta();
  return 0.0;
}

namespace detail {

// Greedy count of closed r-balls, centred on path points, covering the path in order.
inline int ball_count(const System& s, const std::vector<point>& path, double r) {
  int count = 0;
  std::size_t i = 0;
  while (i < path.size()) {
    point c = path[i];
    ++count;
    while (i < path.size() && s.dist(path[i], c) <= r) ++i;
  }
  return count;
}

// Drops interior points while keeping every step at most h.
inline std::vector<point> decimate(const System& s, const std::vector<point>& p, double h) {
  if (p.size() <= 2) return p;
  std::vector<point> out{p.front()};
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (s.dist(p[i + 1], out.back()) > h) out.push_back(p[i]);
  out.push_back(p.back());
  return out;
}

}  // namespace detail

inline CodingTree build_tree(system_ptr sys, point w, double resolution = 0.01, double r0 = 0.25) {
  if (!(resolution > 0)) throw input_error("path resolution must be positive");
  w = sys->normalize(w);
  for (point v : sys->post_branch_set())
    if (sys->dist(v, w) < 1e-6) throw construction_error("basepoint lies on the post-branch set");
  CodingTree t;
  t.sys = sys;
  t.w = w;
  t.resolution = resolution;
  t.r0 = r0;
  t.C = 2 * r0;
  t.theta = sys->contraction();
  auto pre = sys->inverse_branches(w);
  for (std::size_t i = 0; i < pre.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (sys->dist(pre[i].z, pre[j].z) < 1e-9) throw construction_error("basepoint preimages are not distinct");
  try {
    t.paths = sys->coding_paths(w, resolution);
  } catch (const construction_error&) {
    throw;
  } catch (const error& e) {
    throw refinement_error(std::string("path construction failed: ") + e.what());
  }
  if (int(t.paths.size()) != sys->degree()) throw construction_error("expected one path per preimage");
  t.k = 1;
  for (auto& p : t.paths) {
    if (sys->dist(p.front(), w) > 1e-10) throw construction_error("path does not start at the basepoint");
    if (sys->dist(sys->forward(p.back()), w) > 1e-10) throw construction_error("path does not end at a preimage");
    t.wi.push_back(p.back());
    t.k = std::max(t.k, detail::ball_count(*sys, p, r0));
  }
  // Every path must lift from every preimage of w.
  for (auto& p : t.paths)
    for (point s : t.wi) lift_path(*sys, p, s);
  return t;
}

/// Prefix state: orbit[j] = f^j(z_m) for j = 0..m, where m + 1 is the prefix length.
struct coding_state {
  std::vector<int> word;
  std::vector<point> orbit;
  point z() const { return orbit.front(); }
};

inline coding_state root_state(const CodingTree& t, int symbol) {
  if (symbol < 1 || symbol > t.alphabet()) throw input_error("symbol outside the alphabet");
  return {{symbol}, {t.wi[symbol - 1]}};
}

/// Appends a symbol: lifts its path through f^{m+1} along the recorded orbit.
inline coding_state extend(const CodingTree& t, const coding_state& s, int symbol) {
  if (symbol < 1 || symbol > t.alphabet()) throw input_error("symbol outside the alphabet");
  const System& sys = *t.sys;
  std::size_t m = s.orbit.size();
  std::vector<point> ends(m + 1);
  ends[m] = t.wi[symbol - 1];
  std::vector<point> p = t.paths[symbol - 1];
  for (std::size_t i = m; i-- > 0;) {
    p = detail::decimate(sys, lift_path(sys, p, s.orbit[i]), t.resolution);
    ends[i] = p.back();
  }
  coding_state out{s.word, std::move(ends)};
  out.word.push_back(symbol);
  return out;
}

struct coded_point {
  point z;
  double tail_bound;
};

/// z_n(alpha) from alpha_1..alpha_{n+1}, with the a-priori distance bound to pi(alpha).
inline coded_point code_point(const CodingTree& t, const ShiftWord& a, int n) {
  if (n < 0) throw input_error("negative depth");
  if (int(a.depth()) < n + 1) throw input_error("z_n needs n+1 symbols");
  if (a.alphabet() != t.alphabet()) throw input_error("alphabet mismatch");
  auto s = root_state(t, a[1]);
  for (int j = 2; j <= n + 1; ++j) s = extend(t, s, a[j]);
  return {s.z(), t.tail_bound(n)};
}

inline ShiftWord random_word(int d, int n, stream_rng& g) {
  std::vector<int> v(n);
  for (auto& x : v) x = 1 + int(g() % std::uint64_t(d));
  return ShiftWord(d, std::move(v));
}

struct semiconjugacy_report {
  double max_defect = 0;
  double tail_bound = 0;
  bool pass = false;
};

/// max over sampled alpha of rho(f(z_n(alpha)), z_n(sigma alpha)).
inline semiconjugacy_report check_semiconjugacy(const CodingTree& t, int n_samples, int depth, std::uint64_t seed) {
  std::vector<double> defect(std::size_t(std::max(n_samples, 0)), 0.0);
  parallel_for(defect.size(), [&](std::size_t i) {
    stream_rng g(seed, i);
    auto a = random_word(t.alphabet(), depth + 2, g);
    point z = code_point(t, a, depth).z;
    point zs = code_point(t, a.shifted(1), depth).z;
    defect[i] = t.sys->dist(t.sys->forward(z), zs);
  });
  semiconjugacy_report r;
  for (double x : defect) r.max_defect = std::max(r.max_defect, x);
  r.tail_bound = t.tail_bound(depth);
  r.pass = r.max_defect <= 2 * r.tail_bound + 1e-8;
  return r;
}

struct holder_report {
  double slope = 0;
  double bound = 0;  // log theta + 0.1
  int pairs = 0;
  bool pass = false;
};

/// Regresses log rho(pi(alpha), pi(beta)) on the first disagreement index r.
inline holder_report holder_estimate(const CodingTree& t, int n_pairs, std::uint64_t seed, int max_r = 16,
                                     int extra_depth = 24) {
  int d = t.alphabet();
  std::vector<double> xs(n_pairs), ys(n_pairs);
  std::vector<char> keep(n_pairs, 0);
  parallel_for(std::size_t(n_pairs), [&](std::size_t i) {
    stream_rng g(seed, i);
    int r = 1 + int(i % std::size_t(max_r));
    int len = r + extra_depth;
    auto a = random_word(d, len, g);
    auto b = random_word(d, len, g).symbols();
    std::copy(a.symbols().begin(), a.symbols().begin() + (r - 1), b.begin());
    b[r - 1] = 1 + (a[r] - 1 + 1 + int(g() % std::uint64_t(d - 1))) % d;
    double dist = t.sys->dist(code_point(t, a, len - 1).z, code_point(t, ShiftWord(d, b), len - 1).z);
    if (dist > 0) {
      xs[i] = r;
      ys[i] = std::log(dist);
      keep[i] = 1;
    }
  });
  std::vector<double> x, y;
  for (int i = 0; i < n_pairs; ++i)
    if (keep[i]) x.push_back(xs[i]), y.push_back(ys[i]);
  holder_report h;
  h.pairs = int(x.size());
  h.bound = std::log(t.theta) + 0.1;
  if (x.size() < 2) return h;
  h.slope = least_squares(x, y).slope;
  h.pass = h.slope <= h.bound;
  return h;
}

struct coverage_report {
  double fraction = 1;
  double spacing = 0;
  std::vector<std::vector<int>> nearest_word;
  std::vector<double> distance;
  std::string advisory;
};

inline double grid_spacing(const System& s, const std::vector<point>& grid) {
  double sp = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (j != i) nn = std::min(nn, s.dist(grid[i], grid[j]));
    if (std::isfinite(nn)) sp = std::max(sp, nn);
  }
  return sp;
}

/// Fraction of grid points within the grid spacing of some z_{depth-1}, found by beam search.
inline coverage_report surjectivity_coverage(const CodingTree& t, const std::vector<point>& grid, int depth,
                                             int beam = 64) {
  coverage_report r;
  if (grid.empty()) return r;
  if (depth < 1) throw input_error("coverage depth must be at least 1");
  const System& sys = *t.sys;
  r.spacing = grid_spacing(sys, grid);
  r.nearest_word.resize(grid.size());
  r.distance.resize(grid.size());
  int d = t.alphabet();
  parallel_for(grid.size(), [&](std::size_t gi) {
    point x = grid[gi];
    std::vector<std::pair<double, coding_state>> cur;
    for (int a = 1; a <= d; ++a) {
      auto s = root_state(t, a);
      cur.push_back({sys.dist(s.z(), x), std::move(s)});
    }
    for (int m = 2; m <= depth; ++m) {
      std::vector<std::pair<double, coding_state>> next;
      for (auto& [sc, s] : cur)
        for (int a = 1; a <= d; ++a) {
          auto e = extend(t, s, a);
          next.push_back({sys.dist(e.z(), x), std::move(e)});
        }
      std::sort(next.begin(), next.end(), [](auto& u, auto& v) { return u.first < v.first; });
      if (int(next.size()) > beam) next.resize(beam);
      cur = std::move(next);
    }
    r.distance[gi] = cur.front().first;
    r.nearest_word[gi] = cur.front().second.word;
  });
  std::size_t hit = 0;
  for (double e : r.distance) hit += e <= r.spacing * (1 + 1e-9);
  r.fraction = double(hit) / grid.size();
  if (r.fraction < 1)
    r.advisory = "depth " + std::to_string(depth) + " does not resolve the grid spacing; increase the depth";
  return r;
}

struct fiber_count {
  std::int64_t count = 0;
  double rate = 0;  // (1/n) log count
};

/// Depth-n words whose cylinder may contain a point coded to x. Uses the exact
/// cylinder test when the system has one, otherwise the tail-bound ball around z_{n-1}.
inline fiber_count fiber_cylinder_count(const CodingTree& t, point x, int n, double tol = 1e-9,
                                        std::int64_t budget = 2'000'000) {
  if (n < 0) throw input_error("negative depth");
  int d = t.alphabet();
  fiber_count out;
  if (n == 0) {
    out.count = d;
    return out;
  }
  const System& sys = *t.sys;
  std::int64_t visited = 0;
  auto keep = [&](const coding_state& s) {
    int m = int(s.word.size());
    int exact = sys.cylinder_meets(s.word.data(), s.word.size(), x, tol);
    if (exact >= 0) return exact == 1;
    return sys.dist(s.z(), x) <= t.tail_bound(m - 1) + tol;
  };
  std::vector<coding_state> cur;
  for (int a = 1; a <= d; ++a) {
    auto s = root_state(t, a);
    if (keep(s)) cur.push_back(std::move(s));
  }
  for (int m = 2; m <= n; ++m) {
    std::vector<coding_state> next;
    for (auto& s : cur)
      for (int a = 1; a <= d; ++a) {
        if (++visited > budget) throw budget_error("fiber search exceeded its node budget");
        auto e = extend(t, s, a);
        if (keep(e)) next.push_back(std::move(e));
      }
    cur = std::move(next);
  }
  out.count = std::int64_t(cur.size());
  out.rate = out.count > 0 ? std::log(double(out.count)) / n : 0.0;
  return out;
}

/// Fast pi for systems with a closed-form coding; falls back to code_point.
inline point code_fast(const CodingTree& t, const int* w, std::size_t len) {
  if (t.sys->has_exact_coding()) return t.sys->exact_code(w, len);
  ShiftWord a(t.alphabet(), std::vector<int>(w, w + len));
  return code_point(t, a, int(len) - 1).z;
}

}  // namespace thermoform
