#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thermoform {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class input_error : public error { using error::error; };
class sizing_error : public error { using error::error; };
class convergence_error : public error { using error::error; };
class hypothesis_error : public error { using error::error; };
class construction_error : public error { using error::error; };
class refinement_error : public error { using error::error; };
class domain_error : public error { using error::error; };
class coverage_error : public error { using error::error; };
class budget_error : public error { using error::error; };
class divergence_error : public error { using error::error; };
class feasibility_error : public error { using error::error; };
class parameter_error : public error { using error::error; };
class certification_error : public error { using error::error; };

inline constexpr double pi = 3.14159265358979323846;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream: output i of stream (seed, id) is a hash of (key, i).
// Streams with distinct ids are independent, so samples can be drawn in any
// order or on any thread and still reproduce bit for bit.
class stream_rng {
 public:
  using result_type = std::uint64_t;
  stream_rng(std::uint64_t seed, std::uint64_t id = 0)
      : key_(splitmix64(splitmix64(seed) ^ (id * 0xd1b54a32d192ed03ULL + 1))) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("THERMOFORM_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) n = std::min<unsigned>(n, unsigned(v));
  }
  return n;
}

// Runs f(i) for i in [0, n) on up to thread_count() threads, in contiguous blocks.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  unsigned t = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
  if (t <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t block = (n + t - 1) / t;
  for (unsigned k = 0; k < t; ++k) {
    std::size_t lo = k * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&f, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Pairwise summation keeps aggregation error independent of the thread split.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct line_fit {
  double slope = 0, intercept = 0;
  std::size_t n = 0;
};

inline line_fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  line_fit r;
  r.n = x.size();
  if (x.size() < 2) throw input_error("least squares needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw input_error("least squares with constant abscissa");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  return r;
}

inline std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace thermoform
