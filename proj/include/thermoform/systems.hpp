#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace thermoform {

/// Circle systems keep their point in the real part, in [0,1).
using point = std::complex<double>;

struct branch_point {
  point at;
  int local_degree;
};

struct preimage {
  int branch;  // 1..d
  point z;
};

/// Radius eps, density bound zeta in (0,1) and number of critical points p.
struct singularity_budget {
  double eps;
  double zeta;
  int p;
};

class System {
 public:
  virtual ~System() = default;

  virtual std::string name() const = 0;
  virtual int ambient_dimension() const = 0;
  virtual int degree() const = 0;
  virtual point forward(point x) const = 0;
  virtual std::vector<preimage> inverse_branches(point y) const = 0;
  virtual double dist(point a, point b) const = 0;
  virtual std::vector<branch_point> branch_set() const { return {}; }
  /// Forward images of the branch set.
  virtual std::vector<point> branch_values() const {
    std::vector<point> v;
    for (auto& b : branch_set()) v.push_back(forward(b.at));
    return v;
  }
  /// Finite piece of the forward orbit of the branch values.
  virtual std::vector<point> post_branch_set(int iterates = 64) const {
    std::vector<point> v;
    for (point z : branch_values())
      for (int i = 0; i < iterates; ++i) {
        v.push_back(z);
        z = forward(z);
      }
    return v;
  }
  virtual std::vector<point> repellor_sample(int n, std::uint64_t seed) const = 0;
  /// Estimated factor by which inverse branches shrink distances near the repellor.
  virtual double contraction() const = 0;
  virtual singularity_budget budget() const = 0;
  virtual point normalize(point x) const { return x; }

  int local_degree(point x) const {
    for (auto& b : branch_set())
      if (std::abs(b.at - x) < 1e-12) return b.local_degree;
    return 1;
  }

  /// Paths from w to each of its preimages, with steps no longer than `resolution`.
  virtual std::vector<std::vector<point>> coding_paths(point w, double resolution) const = 0;

  /// Closed-form coding map, when the system has one.
  virtual bool has_exact_coding() const { return false; }
  virtual point exact_code(const int* /*w*/, std::size_t /*n*/) const {
    throw construction_error(name() + " has no closed-form coding");
  }
  /// Whether x lies within tol of the image of the cylinder of w: 1 or 0, or -1 when unknown.
  virtual int cylinder_meets(const int* /*w*/, std::size_t /*n*/, point /*x*/, double /*tol*/) const { return -1; }
};

using system_ptr = std::shared_ptr<const System>;

namespace detail {

inline double wrap01(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

inline double circle_gap(double a, double b) {
  double t = std::abs(wrap01(a) - wrap01(b));
  return std::min(t, 1.0 - t);
}

// Straight segment from a to b sampled with step at most h.
inline std::vector<point> segment(point a, point b, double h) {
  int n = std::max(1, int(std::ceil(std::abs(b - a) / h)));
  std::vector<point> v;
  for (int i = 0; i <= n; ++i) v.push_back(a + (b - a) * (double(i) / n));
  return v;
}

}  // namespace detail

/// Shared pieces of the expanding circle maps.
class CircleBase : public System {
 public:
  int ambient_dimension() const override { return 1; }
  int degree() const override { return d_; }
  double dist(point a, point b) const override { return detail::circle_gap(a.real(), b.real()); }
  point normalize(point x) const override { return {detail::wrap01(x.real()), 0.0}; }

  std::vector<point> repellor_sample(int n, std::uint64_t) const override {
    if (n < 1) throw input_error("need at least one sample point");
    std::vector<point> v;
    for (int i = 0; i < n; ++i) v.emplace_back(double(i) / n, 0.0);
    return v;
  }

  singularity_budget budget() const override { return {0.5 - 1e-9, 0.5, 0}; }

  // Unwrapped straight arcs w -> x_i, where x_i in [0,1) solves F(x) = w + i - 1.
  std::vector<std::vector<point>> coding_paths(point w, double resolution) const override {
    std::vector<std::vector<point>> out;
    double w0 = detail::wrap01(w.real());
    for (int i = 1; i <= d_; ++i) {
      double xi = lift_inverse(w0 + i - 1);
      auto seg = detail::segment(w0, xi, resolution);
      for (auto& p : seg) p = normalize(p);
      out.push_back(std::move(seg));
    }
    return out;
  }

  std::vector<preimage> inverse_branches(point y) const override {
    double t = detail::wrap01(y.real());
    std::vector<preimage> out;
    for (int i = 1; i <= d_; ++i) out.push_back({i, {detail::wrap01(lift_inverse(t + i - 1)), 0.0}});
    return out;
  }

 protected:
  explicit CircleBase(int d) : d_(d) {}
  // Inverse of the lifted map F : [0,1) -> [0,d).
  virtual double lift_inverse(double s) const = 0;
  int d_;
};

/// x -> d x mod 1.
class CircleD : public CircleBase {
 public:
  explicit CircleD(int d) : CircleBase(d) {
    if (d < 2) throw parameter_error("circle_d needs d >= 2");
  }
  std::string name() const override { return "circle_" + std::to_string(d_); }
  point forward(point x) const override { return {detail::wrap01(d_ * detail::wrap01(x.real())), 0.0}; }
  double contraction() const override { return 1.0 / d_; }
  bool has_exact_coding() const override { return true; }
  // Base-d expansion with digits alpha_i - 1.
  point exact_code(const int* w, std::size_t n) const override {
    double x = 0;
    for (std::size_t i = n; i-- > 0;) x = (x + (w[i] - 1)) / d_;
    return {detail::wrap01(x), 0.0};
  }
  // The cylinder of w codes the closed arc [x, x + d^-n].
  int cylinder_meets(const int* w, std::size_t n, point x, double tol) const override {
    double left = exact_code(w, n).real();
    double t = detail::wrap01(x.real() - left);
    return t <= std::pow(double(d_), -double(n)) + tol || 1.0 - t <= tol;
  }

 protected:
  double lift_inverse(double s) const override { return s / d_; }
};

/// x -> d x + eps sin(2 pi x) mod 1, expanding for |eps| < (d-1)/(2 pi).
class CirclePerturbed : public CircleBase {
 public:
  CirclePerturbed(int d, double eps) : CircleBase(d), eps_(eps) {
    if (d < 2) throw parameter_error("circle_perturbed needs d >= 2");
    if (!(2 * pi * std::abs(eps) < d - 1))
      throw parameter_error("circle_perturbed: |eps| must be below (d-1)/(2 pi) for expansion");
  }
  std::string name() const override { return "circle_perturbed"; }
  double lift(double x) const { return d_ * x + eps_ * std::sin(2 * pi * x); }
  point forward(point x) const override { return {detail::wrap01(lift(detail::wrap01(x.real()))), 0.0}; }
  double contraction() const override { return 1.0 / (d_ - 2 * pi * std::abs(eps_)); }

 protected:
  // F is increasing with F(0) = 0 and F(1) = d; Newton steps guarded by bisection.
  double lift_inverse(double s) const override {
    double lo = 0, hi = 1, x = s / d_;
    for (int it = 0; it < 100; ++it) {
      double g = lift(x) - s;
      if (g > 0) hi = x; else lo = x;
      double nx = x - g / (d_ + 2 * pi * eps_ * std::cos(2 * pi * x));
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) < 1e-17) return nx;
      x = nx;
    }
    return x;
  }

 private:
  double eps_;
};

/// z -> z^2 + c with |c| < 1/4. Repellor is the Julia set, sampled by inverse iteration.
class QuadraticJulia : public System {
 public:
  explicit QuadraticJulia(point c) : c_(c) {
    if (!(std::abs(c) < 0.25)) throw parameter_error("quadratic_julia needs |c| < 0.25");
    beta_ = 0.5 + std::sqrt(0.25 - c_);
    // Largest local inverse derivative 1/|2z| over a sample of the Julia set.
    theta_ = 0;
    for (point z : repellor_sample(4096, 1)) theta_ = std::max(theta_, 1.0 / (2 * std::abs(z)));
    min_abs_ = 1.0 / (2 * theta_);
  }
  std::string name() const override { return "quadratic_julia"; }
  point parameter() const { return c_; }
  /// Repelling fixed point.
  point beta() const { return beta_; }
  int ambient_dimension() const override { return 2; }
  int degree() const override { return 2; }
  point forward(point z) const override { return z * z + c_; }
  std::vector<preimage> inverse_branches(point y) const override {
    point r = std::sqrt(y - c_);
    return {{1, r}, {2, -r}};
  }
  double dist(point a, point b) const override { return std::abs(a - b); }
  std::vector<branch_point> branch_set() const override { return {{0.0, 2}}; }
  double contraction() const override { return theta_; }
  // Preimage mates on the Julia set are z and -z, at least 2 min|z| apart.
  singularity_budget budget() const override { return {2 * min_abs_, 0.5, 1}; }

  std::vector<point> repellor_sample(int n, std::uint64_t seed) const override {
    if (n < 1) throw input_error("need at least one sample point");
    std::vector<point> v(n);
    for (int i = 0; i < n; ++i) {
      stream_rng g(seed, std::uint64_t(i));
      int depth = 15 + int(g() % 16);
      point z = beta_;
      for (int j = 0; j < depth; ++j) {
        z = std::sqrt(z - c_);
        if (g() & 1) z = -z;
      }
      v[i] = z;
    }
    return v;
  }

  // Tries a straight segment, then detours through the perpendicular bisector.
  std::vector<std::vector<point>> coding_paths(point w, double resolution) const override {
    auto post = post_branch_set();
    double clearance = 0.05;
    auto clear = [&](const std::vector<point>& path) {
      for (point p : path)
        for (point q : post)
          if (std::abs(p - q) < clearance) return false;
      return true;
    };
    for (point q : post)
      if (std::abs(w - q) < clearance) throw construction_error("basepoint too close to the post-branch set");
    std::vector<std::vector<point>> out;
    for (auto& pre : inverse_branches(w)) {
      point a = w, b = pre.z;
      std::vector<std::vector<point>> candidates{detail::segment(a, b, resolution)};
      for (double h : {0.5, -0.5, 1.0, -1.0}) {
        point mid = 0.5 * (a + b) + point(0, h) * (b - a);
        if (std::abs(b - a) < 1e-12) break;
        auto p = detail::segment(a, mid, resolution);
        auto q = detail::segment(mid, b, resolution);
        p.insert(p.end(), q.begin() + 1, q.end());
        candidates.push_back(std::move(p));
      }
      bool found = false;
      for (auto& cnd : candidates)
        if (clear(cnd)) {
          out.push_back(std::move(cnd));
          found = true;
          break;
        }
      if (!found) throw construction_error("no path from the basepoint clears the post-branch set");
    }
    return out;
  }

 private:
  point c_, beta_;
  double theta_ = 0.5, min_abs_ = 1;
};

/// g(r e^{i theta}) = lambda r e^{i d theta} on the closed unit disc.
class LocalModel : public System {
 public:
  LocalModel(double lambda, int d) : lambda_(lambda), d_(d) {
    if (!(lambda > 1)) throw parameter_error("local_model needs lambda > 1");
    if (d < 2) throw parameter_error("local_model needs d >= 2");
  }
  std::string name() const override { return "local_model"; }
  double lambda() const { return lambda_; }
  int ambient_dimension() const override { return 2; }
  int degree() const override { return d_; }
  point forward(point z) const override {
    if (z == point(0)) return 0;
    return std::polar(lambda_ * std::abs(z), d_ * std::arg(z));
  }
  std::vector<preimage> inverse_branches(point y) const override {
    double r = std::abs(y) / lambda_, a = std::arg(y);
    std::vector<preimage> out;
    for (int i = 1; i <= d_; ++i) out.push_back({i, std::polar(r, (a + 2 * pi * (i - 1)) / d_)});
    return out;
  }
  double dist(point a, point b) const override { return std::abs(a - b); }
  std::vector<branch_point> branch_set() const override { return {{0.0, d_}}; }
  // The origin is fixed, so its orbit is the whole post-branch set.
  std::vector<point> post_branch_set(int) const override { return {0.0}; }
  double contraction() const override { return 1.0 / std::min(lambda_, double(d_)); }
  // Preimage mates of a point at radius r sit 2 r sin(pi/d) apart.
  singularity_budget budget() const override { return {0.1, 0.5, 1}; }

  // Uniform points of the disc of radius 1/lambda (the part mapped into the disc).
  std::vector<point> repellor_sample(int n, std::uint64_t seed) const override {
    if (n < 1) throw input_error("need at least one sample point");
    std::vector<point> v(n);
    for (int i = 0; i < n; ++i) {
      stream_rng g(seed, std::uint64_t(i));
      double r = std::sqrt(g.uniform()) / lambda_;
      v[i] = std::polar(r, 2 * pi * g.uniform());
    }
    return v;
  }
  std::vector<std::vector<point>> coding_paths(point, double) const override {
    throw construction_error("local_model has no coding tree");
  }

 private:
  double lambda_;
  int d_;
};

struct system_spec {
  std::string name = "circle_d";
  int d = 2;
  double eps = 0;
  point c = 0;
  double lambda = 2;
};

/// Checks the degree identity and forward(inverse) = id on `n` sample points.
inline void self_test(const System& s, int n = 1000, std::uint64_t seed = 17) {
  auto bv = s.branch_values();
  for (point y : s.repellor_sample(n, seed)) {
    bool near_value = false;
    for (point v : bv) near_value |= std::abs(v - y) < 1e-6;
    if (near_value) continue;
    auto pre = s.inverse_branches(y);
    int total = 0;
    for (std::size_t i = 0; i < pre.size(); ++i) {
      if (s.dist(s.forward(pre[i].z), y) > 1e-10)
        throw construction_error(s.name() + ": forward(inverse) misses the point by more than 1e-10");
      for (std::size_t j = 0; j < i; ++j)
        if (s.dist(pre[i].z, pre[j].z) < 1e-12) throw construction_error(s.name() + ": repeated preimage");
      total += s.local_degree(pre[i].z);
    }
    if (total != s.degree()) throw construction_error(s.name() + ": local degrees do not sum to the degree");
  }
}

inline system_ptr make_system(const system_spec& spec) {
  system_ptr s;
  std::string nm = spec.name;
  int d = spec.d;
  if (nm.rfind("circle_", 0) == 0 && nm != "circle_d" && nm != "circle_perturbed") {
    try {
      d = std::stoi(nm.substr(7));
    } catch (const std::exception&) {
      throw input_error("unknown system '" + nm + "'");
    }
    nm = "circle_d";
  }
  if (nm == "circle_d")
    s = std::make_shared<CircleD>(d);
  else if (nm == "circle_perturbed")
    s = std::make_shared<CirclePerturbed>(d, spec.eps);
  else if (nm == "quadratic_julia")
    s = std::make_shared<QuadraticJulia>(spec.c);
  else if (nm == "local_model")
    s = std::make_shared<LocalModel>(spec.lambda, d);
  else
    throw input_error("unknown system '" + spec.name + "'");
  self_test(*s);
  return s;
}

/// Continuous lift of `path` through f starting at `start`, choosing at each
/// step the preimage nearest the previous lifted point.
inline std::vector<point> lift_path(const System& s, const std::vector<point>& path, point start,
                                    double branch_clearance = 1e-6) {
  if (path.empty()) return {};
  if (s.dist(s.forward(start), path.front()) > 1e-8)
    throw input_error("start point does not map to the beginning of the path");
  auto bv = s.branch_values();
  std::vector<point> out{start};
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    for (point v : bv)
      if (std::abs(path[i] - v) < branch_clearance) throw domain_error("path enters a branch value neighborhood");
    if (i == 0) continue;
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    point best{};
    for (auto& p : s.inverse_branches(path[i])) {
      double e = s.dist(p.z, out.back());
      if (e < d1) {
        d2 = d1;
        d1 = e;
        best = p.z;
      } else if (e < d2) {
        d2 = e;
      }
    }
    if (!(d1 < 0.5 * d2)) throw refinement_error("ambiguous lift; densify the path");
    out.push_back(best);
  }
  return out;
}

struct singular_report {
  std::vector<std::size_t> indices;
  std::size_t count = 0;
};

/// Indices i with another preimage of f(x_i) within eps of x_i.
inline singular_report singular_times(const System& s, const std::vector<point>& orbit, double eps,
                                      double tol = 1e-8) {
  for (std::size_t i = 0; i + 1 < orbit.size(); ++i)
    if (s.dist(s.forward(orbit[i]), orbit[i + 1]) > tol)
      throw input_error("orbit is not consistent at index " + std::to_string(i));
  singular_report r;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    point x = orbit[i];
    for (auto& p : s.inverse_branches(s.forward(x))) {
      double e = s.dist(p.z, x);
      if (e > 1e-9 && e < eps) {
        r.indices.push_back(i);
        break;
      }
    }
  }
  r.count = r.indices.size();
  return r;
}

inline std::vector<point> forward_orbit(const System& s, point x, std::size_t n) {
  std::vector<point> v{x};
  for (std::size_t i = 1; i < n; ++i) v.push_back(s.forward(v.back()));
  return v;
}

}  // namespace thermoform
