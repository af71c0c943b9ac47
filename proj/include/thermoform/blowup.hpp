#pragma once

#include <queue>

#include "cover_frink.hpp"

namespace thermoform {

/// Point of the blown-up space. Angles are in turns. Fiber points carry the
/// grand-orbit label q = (level, index) of their circle S_q; (0, 0) is p.
struct blown_point {
  int q_level = -1;  // -1 off the fibers
  std::int64_t q_index = 0;
  double r = 0, theta = 0;
  bool on_fiber() const { return q_level >= 0; }
  static blown_point chart(double r, double theta) { return {-1, 0, r, detail::wrap01(theta)}; }
  static blown_point fiber(double theta, int level = 0, std::int64_t index = 0) {
    return {level, index, 0, detail::wrap01(theta)};
  }
};

/// Image under the blowdown: a chart coordinate or a grand-orbit label.
struct base_point {
  int q_level = -1;
  std::int64_t q_index = 0;
  point z = 0;
  bool operator==(const base_point&) const = default;
};

/// Blown-up chart embedded as the annulus 1 <= |u| <= 2: u = (1 + r) e^{2 pi i theta}.
/// S_p becomes the unit circle and g acts as (r, theta) -> (lambda r, d theta).
class BlownChart : public System {
 public:
  BlownChart(double lambda, int d) : lambda_(lambda), d_(d) {}
  std::string name() const override { return "blown_chart"; }
  int ambient_dimension() const override { return 2; }
  int degree() const override { return d_; }
  point forward(point u) const override { return std::polar(1 + lambda_ * (std::abs(u) - 1), d_ * std::arg(u)); }
  std::vector<preimage> inverse_branches(point u) const override {
    double r = (std::abs(u) - 1) / lambda_, a = std::arg(u);
    std::vector<preimage> out;
    for (int i = 1; i <= d_; ++i) out.push_back({i, std::polar(1 + r, (a + 2 * pi * (i - 1)) / d_)});
    return out;
  }
  double dist(point a, point b) const override { return std::abs(a - b); }
  std::vector<point> repellor_sample(int n, std::uint64_t seed) const override {
    if (n < 1) throw input_error("need at least one sample point");
    std::vector<point> v(n);
    for (int i = 0; i < n; ++i) {
      stream_rng g(seed, std::uint64_t(i));
      double r = g.uniform() / lambda_;
      v[i] = std::polar(1 + r, 2 * pi * g.uniform());
    }
    return v;
  }
  double contraction() const override { return 1.0 / std::min(lambda_, double(d_)); }
  // Preimages sit 1/d turn apart on circles of radius >= 1, so no time is singular.
  singularity_budget budget() const override { return {std::sin(pi / d_), 0.5, 0}; }
  std::vector<std::vector<point>> coding_paths(point, double) const override {
    throw construction_error("blown_chart has no coding tree");
  }

 private:
  double lambda_;
  int d_;
};

struct blowup_options {
  int ambient_degree = 0;  // 0: same as d_loc
  int N_trunc = 6;
  int k0 = 3;
  int depth = 0;           // deepest ring at t = depth - 1/4; 0 picks the largest depth <= 8 with at most 4000 points
  int angular_factor = 1;  // a ring at t carries K d^(ceil(t) + 1) angles
};

/// Local model lambda r e^{i d theta} at a fixed critical point p of a degree-D
/// ambient system, with p and its truncated grand orbit blown up to circles.
/// The chart sample lives on rings r = lambda^-t, t = 1/4, 3/4, ..., plus S_p;
/// g maps the sample onto itself except for points leaving the chart.
class BlowupModel {
 public:
  double lambda = 2;
  int d_loc = 2, D = 2, N_trunc = 6, k0 = 3, depth = 8, K = 1;

  struct ring {
    double t = 0, r = 0;  // fiber ring: t = inf, r = 0
    std::int64_t Q = 1;   // number of angles
    int first = 0;        // index of angle 0
  };
  std::vector<ring> rings;  // chart rings by increasing t, then the fiber ring
  std::vector<int> ring_of;
  std::vector<std::int64_t> angle_of;
  std::vector<point> base;      // blowdown in chart coordinates
  std::vector<point> embedded;  // BlownChart coordinates
  std::vector<int> img;         // sample index of g(x), -1 if g(x) leaves the chart
  std::vector<std::vector<int>> nbrs;  // grid adjacency used for connected components
  std::vector<double> rhoA;            // all pairs, row-major
  double rhoA_diameter = 0;
  std::size_t sector_edges = 0;

  std::size_t size() const { return ring_of.size(); }
  int fiber_ring() const { return int(rings.size()) - 1; }
  bool is_fiber(int i) const { return ring_of[i] == fiber_ring(); }
  double t_of(int i) const { return rings[ring_of[i]].t; }
  double theta_of(int i) const { return double(angle_of[i]) / double(rings[ring_of[i]].Q); }

  /// |E_n|: points first reaching p after exactly n steps.
  std::int64_t orbit_count(int n) const {
    if (n == 0) return 1;
    return std::int64_t(D - d_loc) * ipow(D, n - 1);
  }

  /// Local model on chart coordinates, parent map on grand-orbit labels.
  base_point f(const base_point& b) const {
    if (b.q_level < 0) {
      if (b.z == point(0)) return {0, 0, 0};
      return {-1, 0, std::polar(lambda * std::abs(b.z), d_loc * std::arg(b.z))};
    }
    if (b.q_level <= 1) return {0, 0, 0};
    return {b.q_level - 1, b.q_index / D, 0};
  }

  blown_point g(const blown_point& x) const {
    if (!x.on_fiber()) return blown_point::chart(lambda * x.r, d_loc * x.theta);
    if (x.q_level == 0) return blown_point::fiber(d_loc * x.theta);
    // Grand-orbit points other than p are not critical: degree 1 on the fiber.
    auto q = f({x.q_level, x.q_index, 0});
    return blown_point::fiber(x.theta, q.q_level, q.q_index);
  }

  base_point blowdown(const blown_point& x) const {
    if (!x.on_fiber()) return {-1, 0, std::polar(x.r, 2 * pi * x.theta)};
    return {x.q_level, x.q_index, 0};
  }

  double rho1(int i, int j) const { return std::abs(base[i] - base[j]); }
  double rho_A(int i, int j) const { return rhoA[std::size_t(i) * size() + std::size_t(j)]; }

  /// Sample index of a blown point on S_p or on a chart ring.
  int index_of(const blown_point& x) const {
    int ri = -1;
    if (x.on_fiber()) {
      if (x.q_level != 0) throw domain_error("only S_p is sampled");
      ri = fiber_ring();
    } else {
      for (int k = 0; k < fiber_ring(); ++k)
        if (std::abs(rings[k].r - x.r) <= 1e-12 * std::max(1.0, x.r)) ri = k;
      if (ri < 0) throw domain_error("radius " + std::to_string(x.r) + " is not a sample ring");
    }
    double a = x.theta * double(rings[ri].Q);
    double ar = std::round(a);
    if (std::abs(a - ar) > 1e-9) throw domain_error("angle " + std::to_string(x.theta) + " is not on the ring grid");
    return rings[ri].first + int(std::int64_t(ar) % rings[ri].Q);
  }

  blown_point point_of(int i) const {
    if (is_fiber(i)) return blown_point::fiber(theta_of(i));
    return blown_point::chart(rings[ring_of[i]].r, theta_of(i));
  }
};

namespace detail {

inline std::size_t blowup_sample_size(int d, int depth, int K) {
  std::size_t n = 0;
  for (int i = 0; i < 2 * depth; ++i) n += std::size_t(K * ipow(d, int(std::ceil((2 * i + 1) / 4.0)) + 1));
  return n + std::size_t(K * ipow(d, depth + 1));
}

inline void build_sample(BlowupModel& m) {
  for (int i = 0; i < 2 * m.depth; ++i) {
    BlowupModel::ring rg;
    rg.t = (2 * i + 1) / 4.0;
    rg.r = std::pow(m.lambda, -rg.t);
    rg.Q = m.K * ipow(m.d_loc, int(std::ceil(rg.t)) + 1);
    m.rings.push_back(rg);
  }
  BlowupModel::ring fib;
  fib.t = std::numeric_limits<double>::infinity();
  fib.Q = m.rings.back().Q;
  m.rings.push_back(fib);
  for (int k = 0; k < int(m.rings.size()); ++k) {
    m.rings[k].first = int(m.ring_of.size());
    for (std::int64_t a = 0; a < m.rings[k].Q; ++a) {
      m.ring_of.push_back(k);
      m.angle_of.push_back(a);
      double th = 2 * pi * double(a) / double(m.rings[k].Q);
      m.base.push_back(std::polar(m.rings[k].r, th));
      m.embedded.push_back(std::polar(1 + m.rings[k].r, th));
    }
  }
  // g: ring t -> ring t - 1, angle a/Q -> d a / Q = a / (Q/d).
  std::size_t N = m.size();
  m.img.assign(N, -1);
  for (std::size_t i = 0; i < N; ++i) {
    int k = m.ring_of[i];
    auto a = m.angle_of[i];
    if (k == m.fiber_ring()) {
      m.img[i] = m.rings[k].first + int((a * m.d_loc) % m.rings[k].Q);
    } else if (k >= 2) {
      const auto& to = m.rings[k - 2];
      m.img[i] = to.first + int(a % to.Q);
    }
  }
  // Grid adjacency: angular neighbours, nearest angles on the next ring, and deepest ring to S_p.
  m.nbrs.assign(N, {});
  auto link = [&](int a, int b) {
    m.nbrs[a].push_back(b);
    m.nbrs[b].push_back(a);
  };
  for (int k = 0; k < int(m.rings.size()); ++k) {
    const auto& rg = m.rings[k];
    for (std::int64_t a = 0; a < rg.Q; ++a) link(rg.first + int(a), rg.first + int((a + 1) % rg.Q));
    if (k + 1 >= int(m.rings.size())) continue;
    const auto& nx = m.rings[k + 1];
    std::int64_t ratio = nx.Q / rg.Q;
    for (std::int64_t b = 0; b < nx.Q; ++b) {
      std::int64_t a = b / ratio;
      link(nx.first + int(b), rg.first + int(a));
      if (b % ratio != 0) link(nx.first + int(b), rg.first + int((a + 1) % rg.Q));
    }
  }
  for (auto& v : m.nbrs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

// Admissible-chain graph: pairs sharing a sector A_{n,j} with weight
// lambda^-n rho_1(g^n x, g^n y), plus a hub joining A* at weight 0.
inline void build_chain_metric(BlowupModel& m) {
  std::size_t N = m.size();
  int hub = int(N);
  std::vector<std::vector<std::pair<int, double>>> adj(N + 1);
  int chart_rings = m.fiber_ring();
  for (int n = 0;; ++n) {
    std::vector<int> in;
    for (int k = 0; k < chart_rings; ++k)
      if (m.rings[k].t > n && m.rings[k].t < n + 2) in.push_back(k);
    if (in.empty()) break;
    std::int64_t Dn = ipow(m.d_loc, n + 1);
    std::vector<std::int64_t> dn_mod(in.size());
    for (std::size_t s = 0; s < in.size(); ++s) {
      std::int64_t Q = m.rings[in[s]].Q, v = 1;
      for (int e = 0; e < n; ++e) v = (v * m.d_loc) % Q;
      dn_mod[s] = v;
    }
    std::vector<int> idx;
    std::vector<point> img;
    for (std::int64_t j = 0; j < Dn; ++j) {
      idx.clear();
      img.clear();
      for (std::size_t s = 0; s < in.size(); ++s) {
        const auto& rg = m.rings[in[s]];
        std::int64_t step = rg.Q / Dn;
        for (std::int64_t a = j * step + 1; a < (j + 2) * step; ++a) {
          std::int64_t aa = a % rg.Q;
          idx.push_back(rg.first + int(aa));
          img.push_back(std::polar(rg.r, 2 * pi * double((aa * dn_mod[s]) % rg.Q) / double(rg.Q)));
        }
      }
      for (std::size_t x = 0; x < idx.size(); ++x)
        for (std::size_t y = x + 1; y < idx.size(); ++y) {
          double w = std::abs(img[x] - img[y]);
          adj[idx[x]].push_back({idx[y], w});
          adj[idx[y]].push_back({idx[x], w});
          ++m.sector_edges;
        }
    }
  }
  for (int k = 0; k < chart_rings; ++k)
    if (m.rings[k].t < 1)
      for (std::int64_t a = 0; a < m.rings[k].Q; ++a) {
        int i = m.rings[k].first + int(a);
        adj[i].push_back({hub, 0.0});
        adj[hub].push_back({i, 0.0});
      }
  // Completion onto S_p: the radial segment to r = 0 has chain length r.
  const auto& deep = m.rings[chart_rings - 1];
  const auto& fib = m.rings[m.fiber_ring()];
  for (std::int64_t a = 0; a < fib.Q; ++a) {
    int i = fib.first + int(a), j = deep.first + int(a);
    adj[i].push_back({j, deep.r});
    adj[j].push_back({i, deep.r});
  }

  m.rhoA.assign(N * N, 0.0);
  parallel_for(N, [&](std::size_t s) {
    std::vector<double> dist(N + 1, std::numeric_limits<double>::infinity());
    using item = std::pair<double, int>;
    std::priority_queue<item, std::vector<item>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0.0, int(s)});
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > dist[v]) continue;
      for (auto [u, w] : adj[v])
        if (dv + w < dist[u]) {
          dist[u] = dv + w;
          pq.push({dist[u], u});
        }
    }
    std::copy(dist.begin(), dist.begin() + std::ptrdiff_t(N), m.rhoA.begin() + std::ptrdiff_t(s * N));
  });
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      double v = std::min(m.rhoA[i * N + j], m.rhoA[j * N + i]);
      if (!std::isfinite(v)) throw construction_error("chain graph is disconnected");
      m.rhoA[i * N + j] = m.rhoA[j * N + i] = v;
      m.rhoA_diameter = std::max(m.rhoA_diameter, v);
    }
}

}  // namespace detail

/// Blowdown semiconjugacy pi(g x) = f(pi x) on `n` random points: chart, S_p and grand-orbit fibers.
inline double blowdown_defect(const BlowupModel& m, int n = 1000, std::uint64_t seed = 29) {
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    stream_rng g(seed, std::uint64_t(i));
    double th = g.uniform();
    blown_point x;
    switch (i % 3) {
      case 0: x = blown_point::chart(g.uniform() / m.lambda, th); break;
      case 1: x = blown_point::fiber(th); break;
      default: {
        int lv = 1 + int(g() % std::uint64_t(std::max(1, m.N_trunc)));
        std::int64_t cnt = m.orbit_count(lv);
        x = cnt > 0 ? blown_point::fiber(th, lv, std::int64_t(g() % std::uint64_t(cnt)))
                    : blown_point::chart(g.uniform() / m.lambda, th);
      }
    }
    auto lhs = m.blowdown(m.g(x)), rhs = m.f(m.blowdown(x));
    if (lhs.q_level != rhs.q_level || lhs.q_index != rhs.q_index) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(lhs.z - rhs.z));
  }
  return worst;
}

inline BlowupModel build_blowup(double lambda, int d_loc, int ambient_degree, int N_trunc,
                                blowup_options opt = {}) {
  if (!(lambda > 1)) throw parameter_error("blow-up needs lambda > 1");
  if (d_loc < 2) throw parameter_error("blow-up needs local degree >= 2");
  if (N_trunc < 0) throw parameter_error("grand-orbit truncation must be >= 0");
  if (ambient_degree == 0) ambient_degree = opt.ambient_degree ? opt.ambient_degree : d_loc;
  if (ambient_degree < d_loc) throw parameter_error("ambient degree below the local degree");
  if (opt.k0 < 2) throw parameter_error("k0 must be at least 2");
  if (opt.angular_factor < 1) throw parameter_error("angular factor must be >= 1");
  BlowupModel m;
  m.lambda = lambda;
  m.d_loc = d_loc;
  m.D = ambient_degree;
  m.N_trunc = N_trunc;
  m.k0 = opt.k0;
  m.K = opt.angular_factor;
  m.depth = opt.depth;
  if (m.depth == 0) {
    m.depth = opt.k0 + 1;
    while (m.depth < 8 && detail::blowup_sample_size(d_loc, m.depth + 1, m.K) <= 4000) ++m.depth;
  }
  if (m.depth < opt.k0 + 1) throw parameter_error("sample depth must exceed k0");
  if (detail::blowup_sample_size(d_loc, m.depth, m.K) > 20000) throw sizing_error("blow-up sample above 20000 points");
  detail::build_sample(m);

  // Invariant self-tests.
  double defect = blowdown_defect(m);
  if (!(defect <= 1e-10)) throw construction_error("blowdown semiconjugacy fails: defect " + std::to_string(defect));
  for (int i = 0; i < 1000; ++i) {
    double th = (i + 0.5) / 1000;
    auto y = m.g(blown_point::fiber(th));
    if (std::abs(y.theta - detail::wrap01(d_loc * th)) > 1e-12)
      throw construction_error("g on S_p is not theta -> d theta");
  }
  detail::build_chain_metric(m);
  return m;
}

/// Grand-orbit copies rho_{A(q)} are supported off the chart: chart pairs see
/// only rho_1 + rho_A, a pair on one S_q sees c^n rho_A of its image on S_p.
struct rho_tilde_value {
  double value = 0, rho1 = 0, rhoA = 0, copies = 0;
  double tail_bound = 0;  // sum over k > N_trunc of (c D^2)^k M
};

inline void check_weight(const BlowupModel& m, double c) {
  if (!(c > 0) || !(c * m.D * m.D < 1))
    throw parameter_error("weight c = " + std::to_string(c) + " violates c d^2 < 1 for d = " + std::to_string(m.D));
}

inline double truncation_tail(const BlowupModel& m, double c) {
  double q = c * m.D * m.D;
  return m.rhoA_diameter * std::pow(q, m.N_trunc + 1) / (1 - q);
}

inline rho_tilde_value rho_tilde(const BlowupModel& m, int i, int j, double c) {
  check_weight(m, c);
  rho_tilde_value v;
  v.rho1 = m.rho1(i, j);
  v.rhoA = m.rho_A(i, j);
  v.value = v.rho1 + v.rhoA;
  v.tail_bound = truncation_tail(m, c);
  return v;
}

inline rho_tilde_value rho_tilde(const BlowupModel& m, const blown_point& x, const blown_point& y, double c) {
  check_weight(m, c);
  bool fx = x.on_fiber() && x.q_level > 0, fy = y.on_fiber() && y.q_level > 0;
  if (!fx && !fy) return rho_tilde(m, m.index_of(x), m.index_of(y), c);
  if (!(fx && fy && x.q_level == y.q_level && x.q_index == y.q_index))
    throw domain_error("positions of grand-orbit points other than p are not modeled");
  if (x.q_level > m.N_trunc) throw domain_error("fiber beyond the grand-orbit truncation");
  // g^n maps S_q onto S_p preserving angles.
  rho_tilde_value v;
  v.rhoA = m.rho_A(m.index_of(blown_point::fiber(x.theta)), m.index_of(blown_point::fiber(y.theta)));
  v.copies = std::pow(c, x.q_level) * v.rhoA;
  v.value = v.copies;
  v.tail_bound = truncation_tail(m, c);
  return v;
}

/// c = e^{-alpha_2} / (2 d^2) with alpha_2 = min(log lambda, alpha_1) / 2 and
/// alpha_1 = log min(lambda, d_loc), the rate of the chart's Euclidean pullbacks.
inline double default_weight(const BlowupModel& m) {
  double a1 = std::log(std::min(m.lambda, double(m.d_loc)));
  double a2 = 0.5 * std::min(std::log(m.lambda), a1);
  return std::min(0.5 / (m.D * m.D), std::exp(-a2) / (2.0 * m.D * m.D));
}

/// Cover levels on the chart sample. A point whose orbit leaves the chart
/// before level n sits in a singleton at level n (its element comes from the
/// ambient cover, which is not modeled).
struct blown_complex {
  CoverComplex cc;
  std::vector<std::vector<char>> escaped;  // per level and element
};

namespace detail {

inline bool angle_in(double x, double lo, double hi, bool closed) {
  const double e = closed ? 1e-12 : -1e-12;
  for (int s = -1; s <= 1; ++s)
    if (x + s > lo - e && x + s < hi + e) return true;
  return false;
}

}  // namespace detail

/// Polar boxes over 0 <= t <= k0 + 1 (bands of width 1 in t, arcs of 1/4 turn,
/// both overlapping by half) plus two arc neighbourhoods of S_p over t > k0.
inline cover_level blowup_initial_cover(const BlowupModel& m, std::pair<double, double> arc0,
                                        std::pair<double, double> arc1) {
  cover_level lv;
  for (int b = 0; b <= 2 * m.k0; ++b) {
    double lo = b / 2.0, hi = lo + 1;
    for (int a = 0; a < 8; ++a) {
      element e;
      for (int i = 0; i < int(m.size()); ++i)
        if (!m.is_fiber(i) && m.t_of(i) >= lo && m.t_of(i) <= hi &&
            detail::angle_in(m.theta_of(i), a / 8.0, a / 8.0 + 0.25, true))
          e.push_back(i);
      if (!e.empty()) lv.push_back(std::move(e));
    }
  }
  for (auto [lo, hi] : {arc0, arc1}) {
    element e;
    for (int i = 0; i < int(m.size()); ++i)
      if ((m.is_fiber(i) || m.t_of(i) > m.k0) && detail::angle_in(m.theta_of(i), lo, hi, false)) e.push_back(i);
    lv.push_back(std::move(e));
  }
  return lv;
}

/// Half-disc neighbourhoods W_p of the certificate cover, 1/16 turn wide margins.
inline cover_level appendix_cover(const BlowupModel& m) {
  return blowup_initial_cover(m, {-1.0 / 16, 9.0 / 16}, {7.0 / 16, 17.0 / 16});
}

/// Arcs V_0 = (-1/8, 5/8) and V_1 = (3/8, 9/8) turns replacing the lift of U_0(p).
inline cover_level arc_pair_cover(const BlowupModel& m) {
  return blowup_initial_cover(m, {-1.0 / 8, 5.0 / 8}, {3.0 / 8, 9.0 / 8});
}

inline blown_complex blowup_pullback(const BlowupModel& m, cover_level U0, int levels) {
  if (levels < 0) throw input_error("negative number of levels");
  std::size_t N = m.size();
  detail::check_covers(U0, N, "initial blow-up cover");
  blown_complex out;
  auto& cc = out.cc;
  cc.sys = std::make_shared<BlownChart>(m.lambda, m.d_loc);
  cc.points = m.embedded;
  cc.invariant_sample = false;
  double sp = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j : m.nbrs[i]) best = std::min(best, std::abs(m.embedded[i] - m.embedded[j]));
    sp = std::max(sp, best);
  }
  cc.spacing = sp;
  cc.adjacency_radius = 0;  // components use the ring grid
  for (auto& e : U0) std::sort(e.begin(), e.end());
  out.escaped.push_back(std::vector<char>(U0.size(), 0));
  cc.levels.push_back(std::move(U0));
  cc.refinement.emplace_back();
  std::vector<std::vector<int>> pre(N);
  std::vector<int> gone;
  for (std::size_t i = 0; i < N; ++i) {
    if (m.img[i] >= 0) pre[m.img[i]].push_back(int(i));
    else gone.push_back(int(i));
  }
  std::vector<int> mark(N, 0);
  int stamp = 0;
  for (int lvl = 1; lvl <= levels; ++lvl) {
    cover_level next;
    std::vector<int> parent;
    std::vector<char> esc;
    const auto& prev = cc.levels.back();
    const auto& prev_esc = out.escaped.back();
    for (std::size_t e = 0; e < prev.size(); ++e) {
      std::vector<int> members;
      for (int j : prev[e]) members.insert(members.end(), pre[j].begin(), pre[j].end());
      if (members.empty()) {
        ++cc.dropped;
        continue;
      }
      for (auto& comp : detail::components(members, m.nbrs, mark, ++stamp)) {
        next.push_back(std::move(comp));
        parent.push_back(int(e));
        esc.push_back(prev_esc[e]);
      }
    }
    for (int i : gone) {
      next.push_back({i});
      parent.push_back(-1);
      esc.push_back(1);
    }
    detail::check_covers(next, N, "blow-up level " + std::to_string(lvl));
    cc.levels.push_back(std::move(next));
    cc.refinement.push_back(std::move(parent));
    out.escaped.push_back(std::move(esc));
  }
  return out;
}

struct certificate_level {
  int level = 0;
  double max_rho1 = 0, max_rhoA = 0, max_rho_tilde = 0;
  double copy_bound = 0;  // Step-3 bound for the rho_{A(q)} summands
  double certified = 0;   // max_rho_tilde + copy_bound
  std::size_t elements = 0, inside_B2 = 0, outside_Bk0 = 0, dichotomy_failures = 0;
  // diam_rhoA(V) / diam_rhoA(g V) over V in B_2 ...
  double max_ratio_all = std::numeric_limits<double>::quiet_NaN();
  // ... and over V in B_3 clear of the two deepest annuli and S_p, where neither
  // the A* shortcut nor the sample floor enters the chains
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  int widest = -1;  // element attaining max_rho_tilde
};

struct contraction_certificate_report {
  double c = 0;
  bool strong_weight = false;  // c d^2 e^{alpha_2} < 1
  std::vector<certificate_level> levels;
  double C_fit = 0, alpha_fit = 0;
  bool pass = false;
};

namespace detail {

struct set_diameters {
  double rho1 = 0, rhoA = 0, tilde = 0;
};

inline set_diameters diameters(const BlowupModel& m, const std::vector<int>& v) {
  set_diameters s;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      double r1 = m.rho1(v[a], v[b]), ra = m.rho_A(v[a], v[b]);
      s.rho1 = std::max(s.rho1, r1);
      s.rhoA = std::max(s.rhoA, ra);
      s.tilde = std::max(s.tilde, r1 + ra);
    }
  return s;
}

inline std::vector<int> image_set(const BlowupModel& m, const std::vector<int>& v) {
  std::vector<int> out;
  for (int i : v)
    if (m.img[i] >= 0) out.push_back(m.img[i]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Max rho~-diameter of V_n for n = 0..levels and a log-linear fit; the
/// certified value adds the Step-3 bound for grand-orbit copies,
/// sum_{k<=n} c^k |E_k| D^k diam_A(V_{n-k}) + sum_{k>n} c^k |E_k| D^k M.
inline contraction_certificate_report contraction_certificate(const BlowupModel& m, int cover_levels, double c) {
  check_weight(m, c);
  if (cover_levels < 1) throw input_error("need at least one cover level");
  contraction_certificate_report rep;
  rep.c = c;
  double a1 = std::log(std::min(m.lambda, double(m.d_loc)));
  double a2 = 0.5 * std::min(std::log(m.lambda), a1);
  rep.strong_weight = c * m.D * m.D * std::exp(a2) < 1;
  auto bc = blowup_pullback(m, appendix_cover(m), cover_levels);
  const auto& cc = bc.cc;
  auto in_B = [&](int i, double k) { return m.is_fiber(i) || m.t_of(i) > k; };
  for (int n = 0; n <= cover_levels; ++n) {
    certificate_level L;
    L.level = n;
    const auto& lv = cc.levels[n];
    for (std::size_t e = 0; e < lv.size(); ++e) {
      if (bc.escaped[n][e] || lv[e].size() < 2) continue;
      ++L.elements;
      auto s = detail::diameters(m, lv[e]);
      L.max_rho1 = std::max(L.max_rho1, s.rho1);
      L.max_rhoA = std::max(L.max_rhoA, s.rhoA);
      if (s.tilde > L.max_rho_tilde) L.max_rho_tilde = s.tilde, L.widest = int(e);
      if (n == 0) continue;
      bool b2 = std::all_of(lv[e].begin(), lv[e].end(), [&](int i) { return in_B(i, 2); });
      bool off = std::none_of(lv[e].begin(), lv[e].end(), [&](int i) { return in_B(i, m.k0); });
      if (b2) {
        ++L.inside_B2;
        double dimg = detail::diameters(m, detail::image_set(m, lv[e])).rhoA;
        if (dimg > 0) {
          double r = s.rhoA / dimg;
          L.max_ratio_all = std::isnan(L.max_ratio_all) ? r : std::max(L.max_ratio_all, r);
          bool clean = std::all_of(lv[e].begin(), lv[e].end(),
                                   [&](int i) { return !m.is_fiber(i) && m.t_of(i) > 3 && m.t_of(i) < m.depth - 2; });
          if (clean) L.max_ratio = std::isnan(L.max_ratio) ? r : std::max(L.max_ratio, r);
        }
      } else if (off) {
        ++L.outside_Bk0;
      } else {
        ++L.dichotomy_failures;
      }
    }
    rep.levels.push_back(L);
  }
  double q = c * m.D * m.D;
  double share = double(m.D - m.d_loc) / m.D;  // c^k |E_k| D^k = share (c D^2)^k
  for (int n = 0; n <= cover_levels; ++n) {
    double b = 0;
    for (int k = 1; k <= n; ++k) b += share * std::pow(q, k) * rep.levels[n - k].max_rhoA;
    b += share * m.rhoA_diameter * std::pow(q, n + 1) / (1 - q);
    rep.levels[n].copy_bound = b;
    rep.levels[n].certified = rep.levels[n].max_rho_tilde + b;
  }
  std::vector<double> x, y;
  for (auto& L : rep.levels)
    if (L.certified > 0) {
      x.push_back(L.level);
      y.push_back(std::log(L.certified));
    }
  if (x.size() < 2) throw certification_error("fewer than two levels with positive diameter");
  auto f = least_squares(x, y);
  rep.alpha_fit = -f.slope;
  rep.C_fit = std::exp(f.intercept);
  rep.pass = rep.alpha_fit > 0;
  if (!rep.pass) {
    const auto& L = rep.levels.back();
    throw certification_error("rho~ diameters do not decay (alpha_fit = " + std::to_string(rep.alpha_fit) +
                               "); widest element at level " + std::to_string(L.level) + " is #" +
                               std::to_string(L.widest));
  }
  return rep;
}

struct sector_contraction {
  int ring = 0;
  double theta0 = 0, width = 0;  // V_0 spans [theta0, theta0 + width] on rings ring, ring + 1
  int branch = 0;                // V_1 is the lift with angles (theta + branch) / d
  double diam0 = 0, diam1 = 0, ratio = 0;
};

/// diam_rhoA(V_1) / diam_rhoA(V_0) for random polar boxes V_0 in B_1 and a
/// connected lift V_1 in B_2. Boxes stay two annuli above the deepest ring.
inline std::vector<sector_contraction> sector_contractions(const BlowupModel& m, int count, std::uint64_t seed,
                                                           double max_width = 0.05) {
  std::vector<int> candidates;
  for (int k = 0; k + 3 + 4 <= m.fiber_ring() - 1; ++k)
    if (m.rings[k].t > 1) candidates.push_back(k);
  if (candidates.empty()) throw sizing_error("sample too shallow for contraction checks");
  std::vector<sector_contraction> out;
  for (int s = 0; s < count; ++s) {
    stream_rng g(seed, std::uint64_t(s));
    sector_contraction sc;
    sc.ring = candidates[g() % candidates.size()];
    sc.theta0 = g.uniform();
    sc.width = max_width * (0.2 + 0.8 * g.uniform());
    sc.branch = int(g() % std::uint64_t(m.d_loc));
    std::vector<int> v0, v1;
    for (int k : {sc.ring, sc.ring + 1})
      for (std::int64_t a = 0; a < m.rings[k].Q; ++a) {
        int i = m.rings[k].first + int(a);
        if (detail::angle_in(m.theta_of(i), sc.theta0, sc.theta0 + sc.width, true)) v0.push_back(i);
      }
    std::sort(v0.begin(), v0.end());
    double lo = (sc.theta0 + sc.branch) / m.d_loc, hi = (sc.theta0 + sc.width + sc.branch) / m.d_loc;
    for (int k : {sc.ring + 2, sc.ring + 3})
      for (std::int64_t a = 0; a < m.rings[k].Q; ++a) {
        int i = m.rings[k].first + int(a);
        if (std::binary_search(v0.begin(), v0.end(), m.img[i]) && detail::angle_in(m.theta_of(i), lo, hi, true))
          v1.push_back(i);
      }
    sc.diam0 = detail::diameters(m, v0).rhoA;
    sc.diam1 = detail::diameters(m, v1).rhoA;
    if (v0.size() < 2 || sc.diam0 == 0) continue;
    sc.ratio = sc.diam1 / sc.diam0;
    out.push_back(sc);
  }
  return out;
}

struct blowup_frink {
  blown_complex complex;
  OmegaRelations omega;
  frink_check hypotheses;
  FrinkMetric metric;
  contraction_fit fit;
};

/// Frink metric from the arc-pair cover: Omega_n = pairs sharing an element of W~_{nM}.
inline blowup_frink frink_on_blowup(const BlowupModel& m, int M, int levels = 8, double eta = 1.0) {
  if (M < 1) throw input_error("block length must be at least 1");
  if (levels < M) throw input_error("need at least M cover levels");
  blowup_frink out;
  out.complex = blowup_pullback(m, arc_pair_cover(m), levels);
  out.omega = build_omega(out.complex.cc, M, eta, true);
  out.hypotheses = verify_frink_hypotheses(out.omega);
  if (!out.hypotheses.all_ok)
    throw hypothesis_error("triple composition fails at Omega_" + std::to_string(out.hypotheses.first_failure));
  out.metric = frink_metric(out.omega);
  out.fit = contraction_report(out.metric, out.complex.cc);
  return out;
}

}  // namespace thermoform
