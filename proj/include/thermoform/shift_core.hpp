#pragma once

#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace thermoform {

/// Default truncation depth for infinite sequences.
inline constexpr int default_truncation = 64;
/// Default number of tail completions when sampling oscillations.
inline constexpr int default_tail_samples = 32;

/// Finite word over {1..d}. The empty word stands for the whole shift space.
class ShiftWord {
 public:
  ShiftWord() = default;
  ShiftWord(int d, std::vector<int> symbols) : d_(d), s_(std::move(symbols)) {
    if (d_ < 2) throw input_error("alphabet size must be at least 2");
    for (int x : s_)
      if (x < 1 || x > d_) throw input_error("symbol " + std::to_string(x) + " outside {1.." + std::to_string(d_) + "}");
  }

  static ShiftWord parse(int d, const std::string& text) {
    std::vector<int> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.find_first_not_of(" \t") == std::string::npos) continue;
      std::size_t pos = 0;
      int x = 0;
      try {
        x = std::stoi(tok, &pos);
      } catch (const std::exception&) {
        throw input_error("bad symbol '" + tok + "'");
      }
      if (tok.find_first_not_of(" \t", pos) != std::string::npos) throw input_error("bad symbol '" + tok + "'");
      v.push_back(x);
    }
    return ShiftWord(d, std::move(v));
  }

  int alphabet() const { return d_; }
  std::size_t depth() const { return s_.size(); }
  const std::vector<int>& symbols() const { return s_; }
  const int* data() const { return s_.data(); }
  /// 1-based access, matching the usual indexing of sequences.
  int operator[](std::size_t i) const { return s_.at(i - 1); }

  ShiftWord shifted(std::size_t m = 1) const {
    if (m > s_.size()) m = s_.size();
    return ShiftWord(d_, std::vector<int>(s_.begin() + m, s_.end()));
  }
  ShiftWord prefix(std::size_t n) const {
    n = std::min(n, s_.size());
    return ShiftWord(d_, std::vector<int>(s_.begin(), s_.begin() + n));
  }
  ShiftWord extended(int symbol) const {
    auto v = s_;
    v.push_back(symbol);
    return ShiftWord(d_, std::move(v));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(s_[i]);
    }
    return out;
  }

  bool operator==(const ShiftWord&) const = default;

 private:
  int d_ = 2;
  std::vector<int> s_;
};

/// 2^{-r} with r the 1-based index of the first disagreement. Comparison stops
/// at the shorter length, so a word and its extension are at distance 0.
inline double shift_distance(const ShiftWord& a, const ShiftWord& b) {
  if (a.alphabet() != b.alphabet()) throw input_error("alphabet mismatch");
  std::size_t n = std::min(a.depth(), b.depth());
  for (std::size_t i = 0; i < n; ++i)
    if (a.data()[i] != b.data()[i]) return std::ldexp(1.0, -int(i + 1));
  return 0.0;
}

/// Index of w_1..w_k among the d^k words, first symbol most significant.
inline std::int64_t word_index(const int* w, int k, int d) {
  std::int64_t idx = 0;
  for (int i = 0; i < k; ++i) idx = idx * d + (w[i] - 1);
  return idx;
}

inline std::vector<int> index_word(std::int64_t idx, int k, int d) {
  std::vector<int> w(k);
  for (int i = k - 1; i >= 0; --i) {
    w[i] = int(idx % d) + 1;
    idx /= d;
  }
  return w;
}

enum class potential_kind { locally_constant, formula };

/// Real function on the shift space: a depth-k table or a formula with Hoelder data.
class Potential {
 public:
  using formula_fn = std::function<double(const int* w, std::size_t len)>;

  static Potential constant(int d, double c) { return table(d, 0, {c}); }

  static Potential table(int d, int k, std::vector<double> values) {
    if (d < 2) throw input_error("alphabet size must be at least 2");
    if (k < 0) throw input_error("table depth must be nonnegative");
    if (std::int64_t(values.size()) != ipow(d, k))
      throw input_error("table of depth " + std::to_string(k) + " needs " + std::to_string(ipow(d, k)) + " entries");
    Potential p;
    p.d_ = d;
    p.kind_ = potential_kind::locally_constant;
    p.depth_ = k;
    p.table_ = std::make_shared<const std::vector<double>>(std::move(values));
    p.C_ = 0;
    p.alpha_ = 1;
    return p;
  }

  /// Table of depth 1 from one value per symbol.
  static Potential first_symbol(int d, std::vector<double> values) { return table(d, 1, std::move(values)); }

  /// Formula potential. f receives at least `window` symbols (periodic extension of shorter words).
  static Potential formula(int d, formula_fn f, double C, double alpha, std::string name = "formula",
                           int window = default_truncation) {
    if (alpha <= 0) throw input_error("Hoelder exponent must be positive");
    if (C < 0) throw input_error("Hoelder constant must be nonnegative");
    Potential p;
    p.d_ = d;
    p.kind_ = potential_kind::formula;
    p.depth_ = -1;
    p.f_ = std::make_shared<const formula_fn>(std::move(f));
    p.C_ = C;
    p.alpha_ = alpha;
    p.name_ = std::move(name);
    p.window_ = window;
    return p;
  }

  int alphabet() const { return d_; }
  potential_kind kind() const { return kind_; }
  bool is_table() const { return kind_ == potential_kind::locally_constant; }
  /// Table depth; -1 for formulas.
  int depth() const { return depth_; }
  /// Number of symbols the evaluator reads.
  int window() const { return is_table() ? depth_ : window_; }
  const std::vector<double>& table_values() const { return *table_; }
  double holder_constant() const { return C_; }
  double holder_exponent() const { return alpha_; }
  const std::string& name() const { return name_; }

  double operator()(const int* w, std::size_t len) const {
    std::size_t need = std::size_t(window());
    if (len >= need) return eval_raw(w);
    if (len == 0) throw input_error("cannot evaluate a potential on the empty word");
    std::vector<int> buf(need);
    for (std::size_t i = 0; i < need; ++i) buf[i] = w[i % len];
    return eval_raw(buf.data());
  }
  double operator()(const ShiftWord& w) const {
    if (w.alphabet() != d_) throw input_error("alphabet mismatch");
    if (depth_ == 0) return (*table_)[0];
    return (*this)(w.data(), w.depth());
  }
  /// Table lookup by word index; tables only.
  double at_index(std::int64_t idx) const { return (*table_)[idx]; }

  Potential shifted(double c) const {
    if (is_table()) {
      auto v = *table_;
      for (auto& x : v) x += c;
      return table(d_, depth_, std::move(v));
    }
    auto self = *this;
    return formula(d_, [self, c](const int* w, std::size_t n) { return self(w, n) + c; }, C_, alpha_,
                   name_ + "+c", window_);
  }

  Potential scaled(double t) const {
    if (is_table()) {
      auto v = *table_;
      for (auto& x : v) x *= t;
      return table(d_, depth_, std::move(v));
    }
    auto self = *this;
    return formula(d_, [self, t](const int* w, std::size_t n) { return t * self(w, n); }, std::abs(t) * C_, alpha_,
                   name_, window_);
  }

  Potential plus(const Potential& o) const {
    if (o.d_ != d_) throw input_error("alphabet mismatch");
    if (is_table() && o.is_table()) {
      int k = std::max(depth_, o.depth_);
      auto a = refined(k), b = o.refined(k);
      std::vector<double> v(a.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
      return table(d_, k, std::move(v));
    }
    auto x = *this, y = o;
    int win = std::max(window(), o.window());
    double alpha = std::min(x.alpha_, y.alpha_);
    return formula(d_, [x, y](const int* w, std::size_t n) { return x(w, n) + y(w, n); }, C_ + o.C_, alpha,
                   "sum", std::max(win, 1));
  }

  Potential minus(const Potential& o) const { return plus(o.scaled(-1.0)); }

  /// u o sigma - u.
  Potential coboundary() const {
    if (is_table()) {
      int k = depth_ + 1;
      std::vector<double> v(std::size_t(ipow(d_, k)));
      for (std::int64_t i = 0; i < std::int64_t(v.size()); ++i) {
        auto w = index_word(i, k, d_);
        double tail = depth_ == 0 ? (*table_)[0] : (*table_)[word_index(w.data() + 1, depth_, d_)];
        double head = depth_ == 0 ? (*table_)[0] : (*table_)[word_index(w.data(), depth_, d_)];
        v[i] = tail - head;
      }
      return table(d_, k, std::move(v));
    }
    auto u = *this;
    return formula(d_, [u](const int* w, std::size_t n) { return u(w + 1, n - 1) - u(w, n); }, 2 * C_, alpha_,
                   "coboundary(" + name_ + ")", window_ + 1);
  }

  /// Table values re-indexed at depth k >= depth().
  std::vector<double> refined(int k) const {
    if (!is_table()) throw input_error("refined() needs a table potential");
    if (k < depth_) throw input_error("cannot coarsen a table");
    std::vector<double> v(std::size_t(ipow(d_, k)));
    std::int64_t drop = ipow(d_, k - depth_);
    for (std::int64_t i = 0; i < std::int64_t(v.size()); ++i) v[i] = (*table_)[i / drop];
    return v;
  }

  /// Depth-k locally constant version: exact for tables, tail average for formulas.
  Potential averaged(int k, int samples = default_tail_samples) const;

 private:
  double eval_raw(const int* w) const {
    if (is_table()) return (*table_)[depth_ == 0 ? 0 : word_index(w, depth_, d_)];
    return (*f_)(w, std::size_t(window_));
  }

  int d_ = 2;
  potential_kind kind_ = potential_kind::locally_constant;
  int depth_ = 0;
  std::shared_ptr<const std::vector<double>> table_;
  std::shared_ptr<const formula_fn> f_;
  double C_ = 0, alpha_ = 1;
  std::string name_ = "table";
  int window_ = default_truncation;
};

/// Stratified tails: all words of length m with d^m <= samples.
inline std::vector<std::vector<int>> tail_completions(int d, int samples) {
  int m = 0;
  while (ipow(d, m + 1) <= samples) ++m;
  std::vector<std::vector<int>> out;
  for (std::int64_t i = 0; i < ipow(d, m); ++i) out.push_back(index_word(i, m, d));
  return out;
}

// Word w followed by tail t, then repeated to `len` symbols.
inline void fill_completion(const int* w, int k, const std::vector<int>& t, int len, int* out) {
  int base = k + int(t.size());
  for (int i = 0; i < len; ++i) {
    int j = i % std::max(base, 1);
    out[i] = j < k ? w[j] : t[j - k];
  }
}

inline Potential Potential::averaged(int k, int samples) const {
  if (is_table()) {
    if (k >= depth_) return table(d_, k, refined(k));
    throw input_error("table depth exceeds requested depth");
  }
  if (k < 0) throw input_error("negative depth");
  auto tails = tail_completions(d_, samples);
  std::int64_t n = ipow(d_, k);
  if (n > 10'000'000) throw sizing_error("d^k exceeds 1e7");
  std::vector<double> v(std::size_t(n), 0.0);
  parallel_for(std::size_t(n), [&](std::size_t i) {
    auto w = index_word(std::int64_t(i), k, d_);
    std::vector<int> buf(window_);
    double s = 0;
    for (auto& t : tails) {
      fill_completion(w.data(), k, t, window_, buf.data());
      s += eval_raw(buf.data());
    }
    v[i] = s / double(tails.size());
  });
  return table(d_, k, std::move(v));
}

/// S_n psi(w) = sum_{j<n} psi(sigma^j w). Each term reads the suffix w[j..], so
/// the cocycle identity holds exactly for words of any length.
inline double birkhoff_sum(const Potential& psi, const ShiftWord& w, long n) {
  if (n < 0) throw input_error("negative Birkhoff length");
  if (std::size_t(n) > w.depth()) throw input_error("word shorter than the number of iterates");
  double s = 0;
  for (long j = 0; j < n; ++j) s += psi(w.data() + j, w.depth() - std::size_t(j));
  return s;
}

namespace detail {

// Largest sampled oscillation over depth-n cylinders of a formula potential.
inline double sampled_oscillation(const Potential& phi, int n, int samples, std::int64_t max_cylinders) {
  int d = phi.alphabet();
  auto tails = tail_completions(d, samples);
  int L = phi.window();
  std::int64_t total = n > 40 ? std::numeric_limits<std::int64_t>::max() : ipow(d, n);
  if (total < 0) total = std::numeric_limits<std::int64_t>::max();
  std::int64_t count = std::min(total, max_cylinders);
  std::vector<double> osc(std::size_t(count), 0.0);
  parallel_for(std::size_t(count), [&](std::size_t c) {
    std::vector<int> w(n);
    if (count == total) {
      w = index_word(std::int64_t(c), n, d);
    } else {
      stream_rng g(0x5eed + std::uint64_t(n), c);
      for (auto& s : w) s = 1 + int(g() % std::uint64_t(d));
    }
    std::vector<int> buf(L);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto& t : tails) {
      fill_completion(w.data(), n, t, L, buf.data());
      double v = phi(buf.data(), std::size_t(L));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    osc[c] = hi - lo;
  });
  return *std::max_element(osc.begin(), osc.end());
}

}  // namespace detail

/// Sup over depth-n cylinders of the oscillation of phi. Exact for tables.
/// For formulas it is a sampled lower bound: `samples` tail completions per
/// cylinder, at most `max_cylinders` cylinders per depth. Since the true
/// variation is non-increasing, the sampled values of all depths n..horizon
/// are lower bounds too and their maximum is reported, which keeps the
/// estimate non-increasing in n up to the horizon.
inline double var_depth(const Potential& phi, int n, int samples = default_tail_samples,
                        std::int64_t max_cylinders = 4096, int horizon = 24) {
  if (n < 0) throw input_error("negative depth");
  int d = phi.alphabet();
  if (phi.is_table()) {
    int k = phi.depth();
    if (n >= k) return 0.0;
    const auto& t = phi.table_values();
    std::int64_t block = ipow(d, k - n);
    double best = 0;
    for (std::int64_t c = 0; c < std::int64_t(t.size()); c += block) {
      auto [lo, hi] = std::minmax_element(t.begin() + c, t.begin() + c + block);
      best = std::max(best, *hi - *lo);
    }
    return best;
  }
  double best = 0;
  for (int j = n; j <= std::max(n, horizon); ++j)
    best = std::max(best, detail::sampled_oscillation(phi, j, samples, max_cylinders));
  return best;
}

/// x in [0,1) with base-d digits w_i - 1: the coding of x -> d x mod 1.
inline double digits_value(const int* w, std::size_t len, int d) {
  double x = 0;
  for (std::size_t i = len; i-- > 0;) x = (x + double(w[i] - 1)) / d;
  return x;
}

/// Builtin formula potentials, addressable by name from configs.
/// cos2pi: cos(2 pi x(w)) with x(w) the base-d value of the word.
inline Potential builtin_formula(int d, const std::string& name, double amplitude = 1.0) {
  if (name == "cos2pi")
    return Potential::formula(
        d, [d, amplitude](const int* w, std::size_t n) { return amplitude * std::cos(2 * pi * digits_value(w, std::min<std::size_t>(n, 53), d)); },
        2 * pi * amplitude, std::log2(double(d)), "cos2pi");
  if (name == "sin2pi")
    return Potential::formula(
        d, [d, amplitude](const int* w, std::size_t n) { return amplitude * std::sin(2 * pi * digits_value(w, std::min<std::size_t>(n, 53), d)); },
        2 * pi * amplitude, std::log2(double(d)), "sin2pi");
  if (name == "identity")
    return Potential::formula(
        d, [d, amplitude](const int* w, std::size_t n) { return amplitude * digits_value(w, std::min<std::size_t>(n, 53), d); },
        amplitude, std::log2(double(d)), "identity");
  throw input_error("unknown builtin formula '" + name + "'");
}

}  // namespace thermoform
