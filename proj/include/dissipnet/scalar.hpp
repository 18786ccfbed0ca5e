#pragma once

#include <algorithm>
#include <cmath>

// Unqualified math calls inside dn:: resolve to these for double and to the
// Var/Dual overloads via ADL for AD types.
namespace dn {

using std::abs;
using std::cbrt;
using std::cosh;
using std::erf;
using std::exp;
using std::log;
using std::log1p;
using std::sqrt;
using std::tanh;

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double softplus(double x) {
  return log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

// ln(cosh(x)), overflow-safe
inline double log_cosh(double x) {
  double ax = std::abs(x);
  return ax + log1p(std::exp(-2.0 * ax)) - 0.6931471805599453;
}

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476));
}

inline double pow_const(double a, double p) { return std::pow(a, p); }

inline double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

inline double value_of(double x) { return x; }

inline bool isfinite_value(double x) { return std::isfinite(x); }

}  // namespace dn
