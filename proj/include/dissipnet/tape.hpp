#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dissipnet/scalar.hpp"

namespace dn {

// Reverse-mode tape. One tape per evaluation; a tape is never shared across
// threads. Nodes store precomputed local partials, so a single backward sweep
// accumulates adjoints of every recorded variable.
class Tape {
 public:
  int add_leaf(double v) {
    val_.push_back(v);
    end_.push_back(static_cast<uint32_t>(parent_.size()));
    return static_cast<int>(val_.size()) - 1;
  }

  int add_node(double v, const int32_t* parents, const double* partials,
               int n) {
    for (int k = 0; k < n; ++k) {
      parent_.push_back(parents[k]);
      partial_.push_back(partials[k]);
    }
    val_.push_back(v);
    end_.push_back(static_cast<uint32_t>(parent_.size()));
    return static_cast<int>(val_.size()) - 1;
  }

  int add_node1(double v, int32_t p0, double d0) {
    return add_node(v, &p0, &d0, 1);
  }

  int add_node2(double v, int32_t p0, double d0, int32_t p1, double d1) {
    int32_t ps[2] = {p0, p1};
    double ds[2] = {d0, d1};
    return add_node(v, ps, ds, 2);
  }

  // adjoint sweep seeded with d(seed)/d(seed) = 1
  void sweep(int seed) {
    adj_.assign(val_.size(), 0.0);
    adj_[seed] = 1.0;
    for (int i = static_cast<int>(val_.size()) - 1; i >= 0; --i) {
      double a = adj_[i];
      if (a == 0.0) continue;
      uint32_t b = i ? end_[i - 1] : 0;
      uint32_t e = end_[i];
      for (uint32_t k = b; k < e; ++k) adj_[parent_[k]] += partial_[k] * a;
    }
  }

  double value(int i) const { return val_[i]; }
  double adjoint(int i) const { return adj_[i]; }
  size_t size() const { return val_.size(); }
  size_t edge_count() const { return parent_.size(); }

  void clear() {
    val_.clear();
    end_.clear();
    parent_.clear();
    partial_.clear();
    adj_.clear();
  }

  void reserve(size_t nodes, size_t edges) {
    val_.reserve(nodes);
    end_.reserve(nodes);
    parent_.reserve(edges);
    partial_.reserve(edges);
  }

 private:
  std::vector<double> val_;
  std::vector<uint32_t> end_;  // cumulative edge count per variable
  std::vector<int32_t> parent_;
  std::vector<double> partial_;
  std::vector<double> adj_;
};

inline Tape*& active_tape() {
  thread_local Tape* t = nullptr;
  return t;
}

// reusable per-thread arena for repeated gradient passes (capacity persists)
inline Tape& scratch_tape() {
  thread_local Tape t;
  t.clear();
  return t;
}

// RAII activation of a tape on the current thread
struct TapeScope {
  explicit TapeScope(Tape& t) : prev(active_tape()) { active_tape() = &t; }
  ~TapeScope() { active_tape() = prev; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;
  Tape* prev;
};

// Scalar bound to the thread's active tape. i < 0 marks a constant, which
// keeps passive subexpressions off the tape entirely.
struct Var {
  double v = 0.0;
  int32_t i = -1;

  Var() = default;
  Var(double c) : v(c) {}  // NOLINT: constants convert implicitly

  static Var leaf(double x) {
    Var r;
    r.v = x;
    r.i = active_tape()->add_leaf(x);
    return r;
  }
  bool taped() const { return i >= 0; }
};

inline double value_of(const Var& x) { return x.v; }

namespace detail {
inline Var node1(double v, const Var& a, double da) {
  Var r;
  r.v = v;
  r.i = active_tape()->add_node1(v, a.i, da);
  return r;
}
inline Var node2(double v, const Var& a, double da, const Var& b, double db) {
  Var r;
  r.v = v;
  r.i = active_tape()->add_node2(v, a.i, da, b.i, db);
  return r;
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  double v = a.v + b.v;
  if (a.i < 0 && b.i < 0) return Var(v);
  if (a.i < 0) return a.v == 0.0 ? b : detail::node1(v, b, 1.0);
  if (b.i < 0) return b.v == 0.0 ? a : detail::node1(v, a, 1.0);
  return detail::node2(v, a, 1.0, b, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
  double v = a.v - b.v;
  if (a.i < 0 && b.i < 0) return Var(v);
  if (a.i < 0) return detail::node1(v, b, -1.0);
  if (b.i < 0) return b.v == 0.0 ? a : detail::node1(v, a, 1.0);
  return detail::node2(v, a, 1.0, b, -1.0);
}

inline Var operator-(const Var& a) {
  if (a.i < 0) return Var(-a.v);
  return detail::node1(-a.v, a, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
  double v = a.v * b.v;
  if (a.i < 0 && b.i < 0) return Var(v);
  if (a.i < 0) return a.v == 0.0 ? Var(0.0) : detail::node1(v, b, a.v);
  if (b.i < 0) return b.v == 0.0 ? Var(0.0) : detail::node1(v, a, b.v);
  return detail::node2(v, a, b.v, b, a.v);
}

inline Var operator/(const Var& a, const Var& b) {
  double v = a.v / b.v;
  if (a.i < 0 && b.i < 0) return Var(v);
  double ib = 1.0 / b.v;
  if (a.i < 0) return detail::node1(v, b, -v * ib);
  if (b.i < 0) return detail::node1(v, a, ib);
  return detail::node2(v, a, ib, b, -v * ib);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }

inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }

inline Var exp(const Var& a) {
  double v = std::exp(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, v);
}

inline Var log(const Var& a) {
  double v = std::log(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 1.0 / a.v);
}

inline Var log1p(const Var& a) {
  double v = std::log1p(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 1.0 / (1.0 + a.v));
}

inline Var sqrt(const Var& a) {
  double v = std::sqrt(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 0.5 / v);
}

inline Var tanh(const Var& a) {
  double v = std::tanh(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 1.0 - v * v);
}

inline Var abs(const Var& a) {
  if (a.i < 0) return Var(std::abs(a.v));
  double s = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
  return detail::node1(std::abs(a.v), a, s);
}

inline Var relu(const Var& a) {
  if (a.i < 0) return Var(a.v > 0.0 ? a.v : 0.0);
  if (a.v <= 0.0) return Var(0.0);
  return detail::node1(a.v, a, 1.0);
}

inline Var softplus(const Var& a) {
  double v = softplus(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 1.0 / (1.0 + std::exp(-a.v)));
}

inline Var log_cosh(const Var& a) {
  double v = log_cosh(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, std::tanh(a.v));
}

inline Var gelu(const Var& a) {
  double v = gelu(a.v);
  if (a.i < 0) return Var(v);
  double phi = 0.5 * (1.0 + std::erf(a.v * 0.7071067811865476));
  double dens = 0.3989422804014327 * std::exp(-0.5 * a.v * a.v);
  return detail::node1(v, a, phi + a.v * dens);
}

inline Var erf(const Var& a) {
  double v = std::erf(a.v);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, 1.1283791670955126 * std::exp(-a.v * a.v));
}

// x^p for constant p
inline Var pow_const(const Var& a, double p) {
  double v = std::pow(a.v, p);
  if (a.i < 0) return Var(v);
  return detail::node1(v, a, p * std::pow(a.v, p - 1.0));
}

inline Var clamp(const Var& a, double lo, double hi) {
  if (a.i < 0) return Var(clamp(a.v, lo, hi));
  if (a.v < lo) return Var(lo);
  if (a.v > hi) return Var(hi);
  return a;
}

// fused inner product; one tape node with up to 2n edges
inline Var dot(const Var* x, const Var* y, int n) {
  double v = 0.0;
  int32_t parents[256];
  double partials[256];
  int m = 0;
  for (int k = 0; k < n; ++k) {
    v += x[k].v * y[k].v;
    if (x[k].i >= 0 && y[k].v != 0.0) {
      parents[m] = x[k].i;
      partials[m++] = y[k].v;
    }
    if (y[k].i >= 0 && x[k].v != 0.0) {
      parents[m] = y[k].i;
      partials[m++] = x[k].v;
    }
  }
  if (m == 0) return Var(v);
  Var r;
  r.v = v;
  r.i = active_tape()->add_node(v, parents, partials, m);
  return r;
}

inline bool isfinite_value(const Var& a) { return std::isfinite(a.v); }

}  // namespace dn
