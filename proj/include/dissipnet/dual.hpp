#pragma once

#include <array>
#include <type_traits>

#include "dissipnet/scalar.hpp"

namespace dn {

// Forward-mode dual number with K tangent slots over an arbitrary scalar S.
// With S = Var this yields forward tangents recorded on the reverse tape
// (nested, second-order differentiation).
template <class S, int K>
struct Dual {
  S v{};
  std::array<S, K> d{};

  Dual() = default;
  Dual(double c) : v(c) {}  // NOLINT: constants convert implicitly
  template <class T = S>
    requires(!std::is_same_v<T, double>)
  Dual(const S& s) : v(s) {}  // NOLINT
};

template <class S, int K>
double value_of(const Dual<S, K>& x) {
  return value_of(x.v);
}

template <class S, int K>
Dual<S, K> operator+(const Dual<S, K>& a, const Dual<S, K>& b) {
  Dual<S, K> r;
  r.v = a.v + b.v;
  for (int k = 0; k < K; ++k) r.d[k] = a.d[k] + b.d[k];
  return r;
}

template <class S, int K>
Dual<S, K> operator-(const Dual<S, K>& a, const Dual<S, K>& b) {
  Dual<S, K> r;
  r.v = a.v - b.v;
  for (int k = 0; k < K; ++k) r.d[k] = a.d[k] - b.d[k];
  return r;
}

template <class S, int K>
Dual<S, K> operator-(const Dual<S, K>& a) {
  Dual<S, K> r;
  r.v = -a.v;
  for (int k = 0; k < K; ++k) r.d[k] = -a.d[k];
  return r;
}

template <class S, int K>
Dual<S, K> operator*(const Dual<S, K>& a, const Dual<S, K>& b) {
  Dual<S, K> r;
  r.v = a.v * b.v;
  for (int k = 0; k < K; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return r;
}

template <class S, int K>
Dual<S, K> operator/(const Dual<S, K>& a, const Dual<S, K>& b) {
  Dual<S, K> r;
  S ib = S(1.0) / b.v;
  r.v = a.v * ib;
  for (int k = 0; k < K; ++k) r.d[k] = (a.d[k] - r.v * b.d[k]) * ib;
  return r;
}

// mixed double/S promotions
template <class S, int K>
Dual<S, K> operator+(double a, const Dual<S, K>& b) {
  Dual<S, K> r = b;
  r.v = S(a) + b.v;
  return r;
}
template <class S, int K>
Dual<S, K> operator+(const Dual<S, K>& a, double b) {
  return b + a;
}
template <class S, int K>
Dual<S, K> operator-(double a, const Dual<S, K>& b) {
  return Dual<S, K>(a) - b;
}
template <class S, int K>
Dual<S, K> operator-(const Dual<S, K>& a, double b) {
  Dual<S, K> r = a;
  r.v = a.v - S(b);
  return r;
}
template <class S, int K>
Dual<S, K> operator*(double a, const Dual<S, K>& b) {
  Dual<S, K> r;
  r.v = a * b.v;
  for (int k = 0; k < K; ++k) r.d[k] = a * b.d[k];
  return r;
}
template <class S, int K>
Dual<S, K> operator*(const Dual<S, K>& a, double b) {
  return b * a;
}
template <class S, int K>
Dual<S, K> operator/(const Dual<S, K>& a, double b) {
  return (1.0 / b) * a;
}
template <class S, int K>
Dual<S, K> operator/(double a, const Dual<S, K>& b) {
  return Dual<S, K>(a) / b;
}

template <class S, int K>
Dual<S, K>& operator+=(Dual<S, K>& a, const Dual<S, K>& b) {
  return a = a + b;
}
template <class S, int K>
Dual<S, K>& operator-=(Dual<S, K>& a, const Dual<S, K>& b) {
  return a = a - b;
}

namespace detail {
// r = f(a) with df the scalar derivative at a.v
template <class S, int K>
Dual<S, K> chain(const Dual<S, K>& a, S v, S df) {
  Dual<S, K> r;
  r.v = v;
  for (int k = 0; k < K; ++k) r.d[k] = df * a.d[k];
  return r;
}
}  // namespace detail

template <class S, int K>
Dual<S, K> exp(const Dual<S, K>& a) {
  S v = exp(a.v);
  return detail::chain(a, v, v);
}

template <class S, int K>
Dual<S, K> log(const Dual<S, K>& a) {
  return detail::chain(a, log(a.v), S(1.0) / a.v);
}

template <class S, int K>
Dual<S, K> log1p(const Dual<S, K>& a) {
  return detail::chain(a, log1p(a.v), S(1.0) / (S(1.0) + a.v));
}

template <class S, int K>
Dual<S, K> sqrt(const Dual<S, K>& a) {
  S v = sqrt(a.v);
  return detail::chain(a, v, S(0.5) / v);
}

template <class S, int K>
Dual<S, K> tanh(const Dual<S, K>& a) {
  S v = tanh(a.v);
  return detail::chain(a, v, S(1.0) - v * v);
}

template <class S, int K>
Dual<S, K> softplus(const Dual<S, K>& a) {
  return detail::chain(a, softplus(a.v), S(1.0) / (S(1.0) + exp(-a.v)));
}

template <class S, int K>
Dual<S, K> log_cosh(const Dual<S, K>& a) {
  return detail::chain(a, log_cosh(a.v), tanh(a.v));
}

template <class S, int K>
Dual<S, K> erf(const Dual<S, K>& a) {
  return detail::chain(a, erf(a.v),
                       1.1283791670955126 * exp(-(a.v * a.v)));
}

template <class S, int K>
Dual<S, K> gelu(const Dual<S, K>& a) {
  S phi = 0.5 * (S(1.0) + erf(a.v * 0.7071067811865476));
  S dens = 0.3989422804014327 * exp(-0.5 * (a.v * a.v));
  return detail::chain(a, a.v * phi, phi + a.v * dens);
}

template <class S, int K>
Dual<S, K> abs(const Dual<S, K>& a) {
  double s = value_of(a.v) > 0.0 ? 1.0 : (value_of(a.v) < 0.0 ? -1.0 : 0.0);
  return detail::chain(a, abs(a.v), S(s));
}

template <class S, int K>
Dual<S, K> relu(const Dual<S, K>& a) {
  if (value_of(a.v) <= 0.0) return Dual<S, K>(0.0);
  return a;
}

template <class S, int K>
Dual<S, K> pow_const(const Dual<S, K>& a, double p) {
  S v = pow_const(a.v, p);
  return detail::chain(a, v, p * pow_const(a.v, p - 1.0));
}

template <class S, int K>
Dual<S, K> clamp(const Dual<S, K>& a, double lo, double hi) {
  if (value_of(a.v) < lo) return Dual<S, K>(lo);
  if (value_of(a.v) > hi) return Dual<S, K>(hi);
  return a;
}

template <class S, int K>
bool isfinite_value(const Dual<S, K>& a) {
  return isfinite_value(a.v);
}

using Dual6 = Dual<double, 6>;

}  // namespace dn
