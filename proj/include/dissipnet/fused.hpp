#pragma once

#include "dissipnet/dual.hpp"
#include "dissipnet/tape.hpp"
#include "dissipnet/tensor.hpp"

// Tape-fused overloads of the hot tensor kernels. One fat node replaces the
// elementary mul/add chain, which shrinks the training graph several-fold.

namespace dn {

inline Mat3<Var> operator*(const Mat3<Var>& x, const Mat3<Var>& y) {
  Mat3<Var> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Var a[3] = {x(i, 0), x(i, 1), x(i, 2)};
      Var b[3] = {y(0, j), y(1, j), y(2, j)};
      r(i, j) = dot(a, b, 3);
    }
  return r;
}

template <int K>
Mat3<Dual<Var, K>> operator*(const Mat3<Dual<Var, K>>& x,
                             const Mat3<Dual<Var, K>>& y) {
  Mat3<Dual<Var, K>> r;
  Var xs[6], ys[6];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        xs[k] = x(i, k).v;
        ys[k] = y(k, j).v;
      }
      r(i, j).v = dot(xs, ys, 3);
      for (int t = 0; t < K; ++t) {
        for (int k = 0; k < 3; ++k) {
          xs[2 * k] = x(i, k).d[t];
          ys[2 * k] = y(k, j).v;
          xs[2 * k + 1] = x(i, k).v;
          ys[2 * k + 1] = y(k, j).d[t];
        }
        r(i, j).d[t] = dot(xs, ys, 6);
      }
    }
  return r;
}

inline Var trace_prod(const Mat3<Var>& x, const Mat3<Var>& y) {
  Var a[9], b[9];
  int m = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      a[m] = x(i, j);
      b[m] = y(j, i);
      ++m;
    }
  return dot(a, b, 9);
}

template <int K>
Dual<Var, K> trace_prod(const Mat3<Dual<Var, K>>& x,
                        const Mat3<Dual<Var, K>>& y) {
  Dual<Var, K> r;
  Var a[18], b[18];
  {
    int m = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        a[m] = x(i, j).v;
        b[m] = y(j, i).v;
        ++m;
      }
    r.v = dot(a, b, 9);
  }
  for (int t = 0; t < K; ++t) {
    int m = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        a[m] = x(i, j).d[t];
        b[m] = y(j, i).v;
        ++m;
        a[m] = x(i, j).v;
        b[m] = y(j, i).d[t];
        ++m;
      }
    r.d[t] = dot(a, b, 18);
  }
  return r;
}

}  // namespace dn
