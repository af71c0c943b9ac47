#pragma once

#include <bit>
#include <queue>
#include <unordered_map>

#include "systems.hpp"

namespace thermoform {

/// Nearest-point and fixed-radius queries on a finite sample. Circle samples
/// use a sorted array with wrap-around, planar samples a uniform grid.
class PointIndex {
 public:
  PointIndex() = default;
  PointIndex(system_ptr sys, const std::vector<point>& pts, double cell) : sys_(std::move(sys)), pts_(&pts) {
    circle_ = sys_->ambient_dimension() == 1;
    if (circle_) {
      order_.resize(pts.size());
      std::iota(order_.begin(), order_.end(), 0);
      std::sort(order_.begin(), order_.end(), [&](int a, int b) { return pts[a].real() < pts[b].real(); });
      for (int i : order_) xs_.push_back(pts[i].real());
    } else {
      cell_ = cell > 0 ? cell : 1e-3;
      for (int i = 0; i < int(pts.size()); ++i) grid_[key(pts[i])].push_back(i);
    }
  }

  int nearest(point q) const {
    const auto& pts = *pts_;
    if (pts.empty()) throw input_error("empty sample");
    if (circle_) {
      double x = sys_->normalize(q).real();
      auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
      std::size_t n = xs_.size(), j = std::size_t(it - xs_.begin());
      int best = -1;
      double bd = 1e300;
      for (std::size_t c : {(j + n - 1) % n, j % n}) {
        double e = sys_->dist(q, pts[order_[c]]);
        if (e < bd) bd = e, best = order_[c];
      }
      return best;
    }
    auto [cx, cy] = cell_of(q);
    int best = -1;
    double bd = 1e300;
    for (long ring = 0;; ++ring) {
      for (long dx = -ring; dx <= ring; ++dx)
        for (long dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          auto f = grid_.find(pack(cx + dx, cy + dy));
          if (f == grid_.end()) continue;
          for (int i : f->second) {
            double e = std::abs(pts[i] - q);
            if (e < bd) bd = e, best = i;
          }
        }
      if (best >= 0 && bd <= ring * cell_) return best;
      if (ring > 4096) return brute_nearest(q);
    }
  }

  /// Indices within distance r of point i, excluding i.
  std::vector<int> within(int i, double r) const {
    const auto& pts = *pts_;
    std::vector<int> out;
    if (circle_) {
      std::size_t n = xs_.size();
      double x = pts[i].real();
      std::size_t j = std::size_t(std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
      for (std::size_t s = 1; s < n; ++s) {
        int k = order_[(j + s) % n];
        if (sys_->dist(pts[i], pts[k]) > r) break;
        out.push_back(k);
      }
      for (std::size_t s = 1; s < n; ++s) {
        int k = order_[(j + n - s) % n];
        if (sys_->dist(pts[i], pts[k]) > r) break;
        if (k != i) out.push_back(k);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      out.erase(std::remove(out.begin(), out.end(), i), out.end());
      return out;
    }
    auto [cx, cy] = cell_of(pts[i]);
    long span = long(std::ceil(r / cell_));
    for (long dx = -span; dx <= span; ++dx)
      for (long dy = -span; dy <= span; ++dy) {
        auto f = grid_.find(pack(cx + dx, cy + dy));
        if (f == grid_.end()) continue;
        for (int k : f->second)
          if (k != i && std::abs(pts[k] - pts[i]) <= r) out.push_back(k);
      }
    return out;
  }

 private:
  std::pair<long, long> cell_of(point q) const {
    return {long(std::floor(q.real() / cell_)), long(std::floor(q.imag() / cell_))};
  }
  static std::uint64_t pack(long x, long y) { return (std::uint64_t(std::uint32_t(x)) << 32) | std::uint32_t(y); }
  std::uint64_t key(point q) const {
    auto [x, y] = cell_of(q);
    return pack(x, y);
  }
  int brute_nearest(point q) const {
    const auto& pts = *pts_;
    int best = 0;
    for (int i = 1; i < int(pts.size()); ++i)
      if (std::abs(pts[i] - q) < std::abs(pts[best] - q)) best = i;
    return best;
  }

  system_ptr sys_;
  const std::vector<point>* pts_ = nullptr;
  bool circle_ = false;
  std::vector<int> order_;
  std::vector<double> xs_;
  double cell_ = 1;
  std::unordered_map<std::uint64_t, std::vector<int>> grid_;
};

using element = std::vector<int>;  // sorted point indices
using cover_level = std::vector<element>;

struct CoverComplex {
  system_ptr sys;
  std::vector<point> points;
  double spacing = 0;           // largest nearest-neighbour distance in the sample
  double adjacency_radius = 0;
  bool invariant_sample = false;  // f maps the sample into itself
  std::vector<cover_level> levels;
  std::vector<std::vector<int>> refinement;  // refinement[n][e]: parent of element e of level n (n >= 1)
  std::size_t dropped = 0;                    // lifted pieces with no sample point
  std::vector<std::string> warnings;
};

inline double sample_spacing(const System& s, const std::vector<point>& pts, const PointIndex& idx) {
  if (pts.size() < 2) return 0;
  std::vector<double> nn(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    double r = 1e-3;
    std::vector<int> v;
    while ((v = idx.within(int(i), r)).empty() && r < 1e3) r *= 2;
    double best = 1e300;
    for (int k : v) best = std::min(best, s.dist(pts[i], pts[k]));
    nn[i] = best;
  });
  return *std::max_element(nn.begin(), nn.end());
}

namespace detail {

inline void check_covers(const cover_level& lv, std::size_t n, const std::string& what) {
  std::vector<char> hit(n, 0);
  for (auto& e : lv)
    for (int i : e) {
      if (i < 0 || std::size_t(i) >= n) throw input_error(what + ": point index out of range");
      hit[i] = 1;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!hit[i]) throw coverage_error(what + " misses point " + std::to_string(i));
}

// Connected components of `members` in the graph joining points within radius.
inline std::vector<element> components(const std::vector<int>& members, const std::vector<std::vector<int>>& nbrs,
                                       std::vector<int>& mark, int stamp) {
  for (int i : members) mark[i] = stamp;
  std::vector<element> out;
  std::vector<int> stack;
  for (int s : members) {
    if (mark[s] != stamp) continue;
    element comp;
    mark[s] = -stamp;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int u : nbrs[v])
        if (mark[u] == stamp) {
          mark[u] = -stamp;
          stack.push_back(u);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace detail

struct pullback_options {
  double adjacency_factor = 2.0;  // adjacency radius in units of the sample spacing
};

/// Builds U_1..U_n from U_0 by taking connected components of preimages on the sample.
inline CoverComplex pullback_cover(system_ptr sys, std::vector<point> points, cover_level U0, int n,
                                   const pullback_options& opt = {}) {
  if (n < 0) throw input_error("negative number of levels");
  detail::check_covers(U0, points.size(), "initial cover");
  CoverComplex cc;
  cc.sys = sys;
  cc.points = std::move(points);
  const auto& pts = cc.points;
  PointIndex idx(sys, pts, 0);
  cc.spacing = sample_spacing(*sys, pts, idx);
  if (sys->ambient_dimension() != 1) idx = PointIndex(sys, pts, std::max(cc.spacing, 1e-9));
  cc.adjacency_radius = opt.adjacency_factor * cc.spacing;
  for (auto& e : U0) std::sort(e.begin(), e.end());
  cc.levels.push_back(std::move(U0));
  cc.refinement.emplace_back();
  if (n == 0) return cc;

  std::size_t N = pts.size();
  std::vector<int> img(N);
  double worst = 0;
  for (std::size_t i = 0; i < N; ++i) {
    point fx = sys->forward(pts[i]);
    img[i] = idx.nearest(fx);
    worst = std::max(worst, sys->dist(fx, pts[img[i]]));
  }
  cc.invariant_sample = worst <= 1e-9;
  if (!cc.invariant_sample)
    cc.warnings.push_back("sample is not forward invariant; images snapped to the nearest sample point");
  std::vector<std::vector<int>> pre(N);  // pre[j]: points whose image is sample point j
  for (std::size_t i = 0; i < N; ++i) pre[img[i]].push_back(int(i));
  std::vector<std::vector<int>> nbrs(N);
  parallel_for(N, [&](std::size_t i) { nbrs[i] = idx.within(int(i), cc.adjacency_radius * (1 + 1e-9)); });

  std::vector<int> mark(N, 0);
  int stamp = 0;
  for (int lvl = 1; lvl <= n; ++lvl) {
    cover_level next;
    std::vector<int> parent;
    const auto& prev = cc.levels.back();
    for (std::size_t e = 0; e < prev.size(); ++e) {
      std::vector<int> members;
      for (int j : prev[e]) members.insert(members.end(), pre[j].begin(), pre[j].end());
      if (members.empty()) {
        ++cc.dropped;
        continue;
      }
      for (auto& comp : detail::components(members, nbrs, mark, ++stamp)) {
        next.push_back(std::move(comp));
        parent.push_back(int(e));
      }
    }
    detail::check_covers(next, N, "level " + std::to_string(lvl));
    cc.levels.push_back(std::move(next));
    cc.refinement.push_back(std::move(parent));
  }
  return cc;
}

/// Open arcs (a,b) of the circle, b may exceed 1.
inline cover_level arc_cover(const std::vector<point>& pts, const std::vector<std::pair<double, double>>& arcs) {
  cover_level lv;
  for (auto [a, b] : arcs) {
    element e;
    for (int i = 0; i < int(pts.size()); ++i) {
      double x = pts[i].real();
      if ((x > a && x < b) || (x + 1 > a && x + 1 < b) || (x - 1 > a && x - 1 < b)) e.push_back(i);
    }
    lv.push_back(std::move(e));
  }
  return lv;
}

/// Curated U_0 for the bundled systems.
inline cover_level default_initial_cover(const System& s, const std::vector<point>& pts) {
  if (s.ambient_dimension() == 1) return arc_cover(pts, {{0.0, 0.6}, {0.5, 1.1}});
  // Two overlapping half planes.
  cover_level lv(2);
  double w = 0;
  for (point p : pts) w = std::max(w, std::abs(p.real()));
  for (int i = 0; i < int(pts.size()); ++i) {
    if (pts[i].real() < 0.2 * w) lv[0].push_back(i);
    if (pts[i].real() > -0.2 * w) lv[1].push_back(i);
  }
  return lv;
}

inline double element_diameter(const System& s, const std::vector<point>& pts, const element& e) {
  double m = 0;
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b) m = std::max(m, s.dist(pts[e[a]], pts[e[b]]));
  return m;
}

inline std::vector<double> level_diameters(const CoverComplex& cc) {
  std::vector<double> out;
  for (auto& lv : cc.levels) {
    std::vector<double> d(lv.size());
    parallel_for(lv.size(), [&](std::size_t e) { d[e] = element_diameter(*cc.sys, cc.points, lv[e]); });
    out.push_back(d.empty() ? 0.0 : *std::max_element(d.begin(), d.end()));
  }
  return out;
}

struct lebesgue_result {
  double eta = 0;
  bool degenerate = false;
  std::string warning;
};

/// min over points x of max over elements E containing x of dist(x, points outside E).
inline lebesgue_result lebesgue_number(const System& s, const std::vector<point>& pts, const cover_level& lv,
                                       double spacing = 0) {
  detail::check_covers(lv, pts.size(), "cover");
  std::size_t N = pts.size();
  std::vector<std::vector<int>> containing(N);
  for (int e = 0; e < int(lv.size()); ++e)
    for (int i : lv[e]) containing[i].push_back(e);
  std::vector<std::vector<char>> in(lv.size(), std::vector<char>(N, 0));
  for (std::size_t e = 0; e < lv.size(); ++e)
    for (int i : lv[e]) in[e][i] = 1;
  double diam = 0;
  std::vector<double> slack(N);
  parallel_for(N, [&](std::size_t x) {
    double best = 0;
    for (int e : containing[x]) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < N; ++y)
        if (!in[e][y]) m = std::min(m, s.dist(pts[x], pts[y]));
      best = std::max(best, m);
    }
    slack[x] = best;
  });
  lebesgue_result r;
  r.eta = *std::min_element(slack.begin(), slack.end());
  if (std::isinf(r.eta)) {
    // Some element is everything.
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = a + 1; b < N; ++b) diam = std::max(diam, s.dist(pts[a], pts[b]));
    r.eta = diam;
  }
  if (r.eta <= spacing * (1 + 1e-9)) {
    r.eta = 0;
    r.degenerate = true;
    r.warning = "Lebesgue number is at sample resolution; the cover has no slack";
  }
  return r;
}

struct expansion_report {
  std::vector<double> diameters;
  std::vector<int> fitted_levels;
  double slope = 0, theta = 1, C = 0;
  bool pass = false;
};

/// Fits log(max diameter) against level, skipping levels at sample resolution.
inline expansion_report expansion_check(const CoverComplex& cc, double resolution_factor = 8.0) {
  if (cc.levels.size() < 3) throw input_error("expansion check needs at least 3 levels");
  expansion_report r;
  r.diameters = level_diameters(cc);
  std::vector<double> x, y;
  for (int n = 0; n < int(r.diameters.size()); ++n)
    if (r.diameters[n] > resolution_factor * cc.spacing) {
      x.push_back(n);
      y.push_back(std::log(r.diameters[n]));
      r.fitted_levels.push_back(n);
    }
  if (x.size() < 2) return r;
  auto f = least_squares(x, y);
  r.slope = f.slope;
  r.theta = std::exp(f.slope);
  r.C = std::exp(f.intercept);
  r.pass = f.slope < 0 && r.theta < 1;
  return r;
}

/// Symmetric boolean relation on n points stored as bit rows.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t n) : n_(n), w_((n + 63) / 64), bits_(n * w_, 0) {}
  static Relation diagonal(std::size_t n) {
    Relation r(n);
    for (std::size_t i = 0; i < n; ++i) r.set(i, i);
    return r;
  }
  static Relation complete(std::size_t n) {
    Relation r(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r.set(i, j);
    return r;
  }
  std::size_t size() const { return n_; }
  bool test(std::size_t i, std::size_t j) const { return (bits_[i * w_ + j / 64] >> (j % 64)) & 1; }
  void set(std::size_t i, std::size_t j) { bits_[i * w_ + j / 64] |= std::uint64_t(1) << (j % 64); }
  void set_pair(std::size_t i, std::size_t j) {
    set(i, j);
    set(j, i);
  }
  const std::uint64_t* row(std::size_t i) const { return bits_.data() + i * w_; }
  std::uint64_t* row(std::size_t i) { return bits_.data() + i * w_; }
  std::size_t words() const { return w_; }

  std::vector<int> row_indices(std::size_t i) const {
    std::vector<int> v;
    for (std::size_t k = 0; k < w_; ++k)
      for (std::uint64_t b = row(i)[k]; b; b &= b - 1) v.push_back(int(k * 64 + std::countr_zero(b)));
    return v;
  }
  bool subset_of(const Relation& o) const {
    for (std::size_t k = 0; k < bits_.size(); ++k)
      if (bits_[k] & ~o.bits_[k]) return false;
    return true;
  }
  /// Returns true when something was removed.
  bool intersect(const Relation& o) {
    bool changed = false;
    for (std::size_t k = 0; k < bits_.size(); ++k) {
      auto v = bits_[k] & o.bits_[k];
      changed |= v != bits_[k];
      bits_[k] = v;
    }
    return changed;
  }
  Relation compose(const Relation& o) const {
    Relation r(n_);
    parallel_for(n_, [&](std::size_t i) {
      auto* out = r.row(i);
      for (int j : row_indices(i)) {
        const auto* src = o.row(j);
        for (std::size_t k = 0; k < w_; ++k) out[k] |= src[k];
      }
    });
    return r;
  }
  bool operator==(const Relation& o) const { return n_ == o.n_ && bits_ == o.bits_; }

 private:
  std::size_t n_ = 0, w_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// V_n: pairs of points sharing an element of U_n.
inline Relation shared_element_relation(std::size_t n_points, const cover_level& lv) {
  Relation r = Relation::diagonal(n_points);
  for (auto& e : lv)
    for (int a : e)
      for (int b : e) r.set(a, b);
  return r;
}

struct OmegaRelations {
  int M = 1;
  bool stride = false;  // Omega_n = V_{nM} instead of the union over a block
  std::vector<Relation> rel;  // rel[0] is all pairs
  int nesting_repairs = 0;
  std::vector<std::string> notes;
};

/// Smallest M with every available level l >= M of diameter below eta/3.
inline int choose_block_length(const std::vector<double>& diameters, double eta) {
  for (int M = 1; M < int(diameters.size()); ++M) {
    bool ok = true;
    for (int l = M; l < int(diameters.size()); ++l) ok &= diameters[l] < eta / 3;
    if (ok) return M;
  }
  throw hypothesis_error("no available level has diameter below eta/3; pull back further");
}

/// Omega_0 = all pairs, Omega_n = union of V_{Mn} .. V_{Mn+M-1}.
inline OmegaRelations build_omega(const CoverComplex& cc, int M, double eta, bool stride = false) {
  if (M < 1) throw input_error("block length must be at least 1");
  auto diam = level_diameters(cc);
  for (int l = M; l < int(diam.size()); ++l)
    if (!(diam[l] < eta / 3))
      throw hypothesis_error("level " + std::to_string(l) + " has diameter " + std::to_string(diam[l]) +
                             ", not below eta/3 = " + std::to_string(eta / 3));
  std::size_t N = cc.points.size();
  OmegaRelations om;
  om.M = M;
  om.stride = stride;
  om.rel.push_back(Relation::complete(N));
  int L = int(cc.levels.size()) - 1;
  for (int n = 1;; ++n) {
    int lo = n * M, hi = stride ? n * M : n * M + M - 1;
    if (hi > L) break;
    Relation r = Relation::diagonal(N);
    for (int l = lo; l <= hi; ++l)
      for (auto& e : cc.levels[l])
        for (int a : e)
          for (int b : e) r.set(a, b);
    if (r.intersect(om.rel.back())) {
      ++om.nesting_repairs;
      om.notes.push_back("Omega_" + std::to_string(n) + " intersected with Omega_" + std::to_string(n - 1));
    }
    om.rel.push_back(std::move(r));
  }
  return om;
}

struct frink_check {
  std::vector<char> triple_ok;  // index n >= 1: Omega_n o Omega_n o Omega_n inside Omega_{n-1}
  bool all_ok = true;
  int first_failure = -1;
  bool intersection_is_diagonal = false;
};

inline frink_check verify_frink_hypotheses(const OmegaRelations& om) {
  if (om.rel.size() < 2) throw input_error("need at least two relations");
  frink_check r;
  r.triple_ok.assign(om.rel.size(), 1);
  for (std::size_t n = 1; n < om.rel.size(); ++n) {
    auto t = om.rel[n].compose(om.rel[n]).compose(om.rel[n]);
    bool ok = t.subset_of(om.rel[n - 1]);
    r.triple_ok[n] = ok;
    if (!ok && r.all_ok) {
      r.all_ok = false;
      r.first_failure = int(n);
    }
  }
  r.intersection_is_diagonal = om.rel.back() == Relation::diagonal(om.rel.back().size());
  return r;
}

struct FrinkMetric {
  std::size_t n = 0;
  std::vector<double> d;  // row-major n x n
  int M = 1;
  double C = 2, theta = 0.5;
  double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

namespace detail {

// Deepest m with the pair in Omega_m.
inline int pair_depth(const OmegaRelations& om, std::size_t i, std::size_t j) {
  int m = 0;
  while (m + 1 < int(om.rel.size()) && om.rel[m + 1].test(i, j)) ++m;
  return m;
}

}  // namespace detail

/// Chain metric rho'(x,y) = inf over chains of sum D, with D = 2^-(n(x,y)+1) off
/// the diagonal, then the sandwich Omega_n in {rho' < 2^-n} in Omega_{n-1} is checked.
inline FrinkMetric frink_metric(const OmegaRelations& om) {
  if (om.rel.size() < 2) throw input_error("need at least two relations");
  std::size_t N = om.rel[0].size();
  int nmax = int(om.rel.size()) - 1;
  // Every pair has D <= 1/2, so chains through a D = 1/2 link never beat the direct link.
  std::vector<std::vector<std::pair<int, double>>> adj(N);
  parallel_for(N, [&](std::size_t i) {
    for (int j : om.rel[1].row_indices(i))
      if (std::size_t(j) != i) adj[i].push_back({j, std::ldexp(1.0, -(detail::pair_depth(om, i, j) + 1))});
  });
  FrinkMetric fm;
  fm.n = N;
  fm.M = om.M;
  fm.theta = std::pow(2.0, -1.0 / om.M);
  fm.d.assign(N * N, 0.5);
  parallel_for(N, [&](std::size_t s) {
    double* row = fm.d.data() + s * N;
    std::vector<double> dist(N, 0.5);
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
    std::copy(dist.begin(), dist.end(), row);
  });
  // Symmetrize against rounding in the summation order.
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      double v = std::min(fm.d[i * N + j], fm.d[j * N + i]);
      fm.d[i * N + j] = fm.d[j * N + i] = v;
    }
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      if (i == j) continue;
      double r = fm(i, j);
      int depth = detail::pair_depth(om, i, j);
      if (!(r < std::ldexp(1.0, -depth)))
        throw construction_error("sandwich fails: pair (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") lies in Omega_" + std::to_string(depth) + " but rho' = " + std::to_string(r));
      // Largest available m with rho' < 2^-m must satisfy m - 1 <= depth.
      int m = 0;
      while (m + 1 <= nmax + 1 && r < std::ldexp(1.0, -(m + 1))) ++m;
      if (m - 1 > depth)
        throw construction_error("sandwich fails: pair (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") has rho' = " + std::to_string(r) + " but is outside Omega_" +
                                 std::to_string(m - 1));
    }
  return fm;
}

struct contraction_fit {
  std::vector<double> diameters;  // max rho'-diameter per level
  double C_fit = 0, theta_fit = 1;
  double theta_bound = 1;  // 2^{-1/M} + 0.05
  bool pass = false;
};

inline std::vector<double> metric_level_diameters(const FrinkMetric& m, const CoverComplex& cc) {
  if (m.n != cc.points.size()) throw input_error("metric and cover complex use different point sets");
  std::vector<double> out;
  for (auto& lv : cc.levels) {
    std::vector<double> d(lv.size(), 0.0);
    parallel_for(lv.size(), [&](std::size_t e) {
      for (std::size_t a = 0; a < lv[e].size(); ++a)
        for (std::size_t b = a + 1; b < lv[e].size(); ++b) d[e] = std::max(d[e], m(lv[e][a], lv[e][b]));
    });
    out.push_back(d.empty() ? 0.0 : *std::max_element(d.begin(), d.end()));
  }
  return out;
}

/// Fits log max rho'-diameter against level over levels with positive diameter.
inline contraction_fit contraction_report(const FrinkMetric& m, const CoverComplex& cc) {
  if (cc.levels.size() < 2) throw input_error("contraction report needs at least two levels");
  contraction_fit r;
  r.diameters = metric_level_diameters(m, cc);
  std::vector<double> x, y;
  for (int n = 0; n < int(r.diameters.size()); ++n)
    if (r.diameters[n] > 0) {
      x.push_back(n);
      y.push_back(std::log(r.diameters[n]));
    }
  r.theta_bound = std::pow(2.0, -1.0 / m.M) + 0.05;
  if (x.size() < 2) throw input_error("contraction report needs at least two levels with positive diameter");
  auto f = least_squares(x, y);
  r.theta_fit = std::exp(f.slope);
  r.C_fit = std::exp(f.intercept);
  r.pass = r.theta_fit <= r.theta_bound;
  return r;
}

}  // namespace thermoform
