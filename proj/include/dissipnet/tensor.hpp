#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "dissipnet/scalar.hpp"

namespace dn {

// Dense 3x3 tensor, row-major (11,12,13,21,22,23,31,32,33).
// Generic over the scalar type so the same kernels run on plain doubles,
// forward-mode duals and reverse-mode tape variables.
template <class S>
struct Mat3 {
  std::array<S, 9> a{};

  static Mat3 identity() {
    Mat3 m;
    m.a[0] = S(1.0);
    m.a[4] = S(1.0);
    m.a[8] = S(1.0);
    return m;
  }
  static Mat3 zero() { return Mat3{}; }
  static Mat3 diag(const S& x, const S& y, const S& z) {
    Mat3 m;
    m.a[0] = x;
    m.a[4] = y;
    m.a[8] = z;
    return m;
  }

  S& operator()(int i, int j) { return a[3 * i + j]; }
  const S& operator()(int i, int j) const { return a[3 * i + j]; }
};

// Symmetric 3x3 tensor in Voigt order (11,22,33,12,13,23), no shear doubling.
template <class S>
struct Sym3 {
  std::array<S, 6> a{};

  static Sym3 identity() {
    Sym3 m;
    m.a[0] = S(1.0);
    m.a[1] = S(1.0);
    m.a[2] = S(1.0);
    return m;
  }
  static Sym3 zero() { return Sym3{}; }
  static Sym3 diag(const S& x, const S& y, const S& z) {
    Sym3 m;
    m.a[0] = x;
    m.a[1] = y;
    m.a[2] = z;
    return m;
  }

  S operator()(int i, int j) const {
    if (i == j) return a[i];
    int k = i + j;  // (0,1)->1: idx 3, (0,2)->2: idx 4, (1,2)->3: idx 5
    return a[2 + k];
  }

  Mat3<S> full() const {
    Mat3<S> m;
    m.a = {a[0], a[3], a[4], a[3], a[1], a[5], a[4], a[5], a[2]};
    return m;
  }
};

template <class S>
struct Vec3 {
  std::array<S, 3> a{};
  S& operator[](int i) { return a[i]; }
  const S& operator[](int i) const { return a[i]; }
};

using Tensor3 = Mat3<double>;
using SymTensor3 = Sym3<double>;
using UnitVector3 = Vec3<double>;  // callers normalize via make_unit()

// ---------------------------------------------------------------------------
// arithmetic

template <class S>
Mat3<S> operator+(const Mat3<S>& x, const Mat3<S>& y) {
  Mat3<S> r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

template <class S>
Mat3<S> operator-(const Mat3<S>& x, const Mat3<S>& y) {
  Mat3<S> r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

template <class S>
Mat3<S> operator*(double s, const Mat3<S>& x) {
  Mat3<S> r;
  for (int i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
  return r;
}

template <class S>
  requires(!std::is_same_v<S, double>)
Mat3<S> operator*(const S& s, const Mat3<S>& x) {
  Mat3<S> r;
  for (int i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
  return r;
}

template <class S>
Sym3<S> operator+(const Sym3<S>& x, const Sym3<S>& y) {
  Sym3<S> r;
  for (int i = 0; i < 6; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

template <class S>
Sym3<S> operator-(const Sym3<S>& x, const Sym3<S>& y) {
  Sym3<S> r;
  for (int i = 0; i < 6; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

template <class S>
Sym3<S> operator*(double s, const Sym3<S>& x) {
  Sym3<S> r;
  for (int i = 0; i < 6; ++i) r.a[i] = s * x.a[i];
  return r;
}

template <class S>
  requires(!std::is_same_v<S, double>)
Sym3<S> operator*(const S& s, const Sym3<S>& x) {
  Sym3<S> r;
  for (int i = 0; i < 6; ++i) r.a[i] = s * x.a[i];
  return r;
}

template <class S>
Mat3<S> operator*(const Mat3<S>& x, const Mat3<S>& y) {
  Mat3<S> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
  return r;
}

template <class S>
Vec3<S> operator*(const Mat3<S>& m, const Vec3<S>& v) {
  Vec3<S> r;
  for (int i = 0; i < 3; ++i)
    r[i] = m(i, 0) * v[0] + m(i, 1) * v[1] + m(i, 2) * v[2];
  return r;
}

template <class S>
Mat3<S> transpose(const Mat3<S>& m) {
  Mat3<S> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(j, i);
  return r;
}

template <class S>
S trace(const Mat3<S>& m) {
  return m.a[0] + m.a[4] + m.a[8];
}

template <class S>
S trace(const Sym3<S>& m) {
  return m.a[0] + m.a[1] + m.a[2];
}

// double contraction A : B
template <class S>
S ddot(const Mat3<S>& x, const Mat3<S>& y) {
  S r = x.a[0] * y.a[0];
  for (int i = 1; i < 9; ++i) r = r + x.a[i] * y.a[i];
  return r;
}

template <class S>
S ddot(const Sym3<S>& x, const Sym3<S>& y) {
  return x.a[0] * y.a[0] + x.a[1] * y.a[1] + x.a[2] * y.a[2] +
         2.0 * (x.a[3] * y.a[3] + x.a[4] * y.a[4] + x.a[5] * y.a[5]);
}

template <class S>
S dot(const Vec3<S>& x, const Vec3<S>& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}

template <class S>
Vec3<S> cross(const Vec3<S>& x, const Vec3<S>& y) {
  Vec3<S> r;
  r[0] = x[1] * y[2] - x[2] * y[1];
  r[1] = x[2] * y[0] - x[0] * y[2];
  r[2] = x[0] * y[1] - x[1] * y[0];
  return r;
}

template <class S>
Mat3<S> outer(const Vec3<S>& x, const Vec3<S>& y) {
  Mat3<S> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = x[i] * y[j];
  return r;
}

template <class S>
Sym3<S> sym(const Mat3<S>& m) {
  Sym3<S> r;
  r.a[0] = m.a[0];
  r.a[1] = m.a[4];
  r.a[2] = m.a[8];
  r.a[3] = 0.5 * (m.a[1] + m.a[3]);
  r.a[4] = 0.5 * (m.a[2] + m.a[6]);
  r.a[5] = 0.5 * (m.a[5] + m.a[7]);
  return r;
}

template <class S>
S det(const Mat3<S>& m) {
  return m.a[0] * (m.a[4] * m.a[8] - m.a[5] * m.a[7]) -
         m.a[1] * (m.a[3] * m.a[8] - m.a[5] * m.a[6]) +
         m.a[2] * (m.a[3] * m.a[7] - m.a[4] * m.a[6]);
}

template <class S>
S det(const Sym3<S>& m) {
  return det(m.full());
}

// cofactor via 2x2 minors; valid for singular input as well
template <class S>
Mat3<S> cof(const Mat3<S>& m) {
  Mat3<S> r;
  r(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  r(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  r(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  r(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  r(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  r(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  r(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  r(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  r(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return r;
}

template <class S>
Sym3<S> cof(const Sym3<S>& m) {
  return sym(cof(m.full()));
}

// inverse through the cofactor; caller guarantees det != 0
template <class S>
Mat3<S> inverse(const Mat3<S>& m) {
  Mat3<S> c = cof(m);
  S d = m.a[0] * c.a[0] + m.a[1] * c.a[1] + m.a[2] * c.a[2];
  S inv_d = S(1.0) / d;
  return inv_d * transpose(c);
}

template <class S>
Sym3<S> inverse(const Sym3<S>& m) {
  return sym(inverse(m.full()));
}

template <class S>
Mat3<S> dev(const Mat3<S>& m) {
  S t = (1.0 / 3.0) * trace(m);
  Mat3<S> r = m;
  r.a[0] = r.a[0] - t;
  r.a[4] = r.a[4] - t;
  r.a[8] = r.a[8] - t;
  return r;
}

template <class S>
Sym3<S> dev(const Sym3<S>& m) {
  S t = (1.0 / 3.0) * trace(m);
  Sym3<S> r = m;
  r.a[0] = r.a[0] - t;
  r.a[1] = r.a[1] - t;
  r.a[2] = r.a[2] - t;
  return r;
}

// tr(A B) without forming the product (fused overloads in fused.hpp)
template <class S>
S trace_prod(const Mat3<S>& x, const Mat3<S>& y) {
  S r = x(0, 0) * y(0, 0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i || j) r += x(i, j) * y(j, i);
  return r;
}

// outer tensor product of second-order tensors,
// A # B = (trA trB - tr(AB)) I + B^T A^T + A^T B^T - trA B^T - trB A^T
template <class S>
Mat3<S> outer_hash(const Mat3<S>& A, const Mat3<S>& B) {
  Mat3<S> At = transpose(A);
  Mat3<S> Bt = transpose(B);
  S ta = trace(A);
  S tb = trace(B);
  S tab = trace_prod(A, B);
  Mat3<S> r = Bt * At + At * Bt;
  S c = ta * tb - tab;
  r.a[0] = r.a[0] + c;
  r.a[4] = r.a[4] + c;
  r.a[8] = r.a[8] + c;
  return r - ta * Bt - tb * At;
}

template <class S>
Sym3<S> outer_hash(const Sym3<S>& A, const Sym3<S>& B) {
  return sym(outer_hash(A.full(), B.full()));
}

// ---------------------------------------------------------------------------
// double-only kernels (src/tensor.cpp)

struct EigSym {
  std::array<double, 3> w;        // eigenvalues, descending
  std::array<Vec3<double>, 3> v;  // orthonormal eigenvectors
};

// Closed-form (Cardano) eigendecomposition with a Jacobi fallback when the
// eigenvalue gaps drop below 1e-8.
EigSym eig_sym(const SymTensor3& A);

// SPD square root; throws std::domain_error if min eigenvalue <= 0
SymTensor3 sqrt_spd(const SymTensor3& A);

// matrix exponential of a symmetric tensor via eigendecomposition
SymTensor3 expm_sym(const SymTensor3& A);

// rotation with R e1 = n; the antipodal case n = -e1 maps to a 180-degree
// rotation about e2
Tensor3 rodrigues(const UnitVector3& n);

// SPD tensor U = L L^T from six hidden states; L has softplus-mapped diagonal
// f(h) = softplus(ln2 * h)/ln2 (so f(0) = 1) and off-diagonal entries
// (h4,h5,h6) at (2,1),(3,2),(3,1)
template <class S>
Sym3<S> cholesky_from_states(const std::array<S, 6>& h) {
  constexpr double ln2 = 0.6931471805599453;
  S d0 = (1.0 / ln2) * softplus(ln2 * h[0]);
  S d1 = (1.0 / ln2) * softplus(ln2 * h[1]);
  S d2 = (1.0 / ln2) * softplus(ln2 * h[2]);
  // L = [[d0,0,0],[h4,d1,0],[h6,h5,d2]], U = L L^T
  Sym3<S> u;
  u.a[0] = d0 * d0;
  u.a[1] = h[3] * h[3] + d1 * d1;
  u.a[2] = h[5] * h[5] + h[4] * h[4] + d2 * d2;
  u.a[3] = h[3] * d0;                  // (1,2)
  u.a[4] = h[5] * d0;                  // (1,3)
  u.a[5] = h[5] * h[3] + h[4] * d1;    // (2,3)
  return u;
}

// Matrix exponential by scaling-and-squaring on a truncated series. Works for
// any scalar type; also serves as the independent oracle for expm_sym.
template <class S>
Mat3<S> expm_series(const Mat3<S>& A) {
  double m = 0.0;
  for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(value_of(A.a[i])));
  int squarings = 0;
  while (m > 0.5 && squarings < 40) {
    m *= 0.5;
    ++squarings;
  }
  double scale = 1.0;
  for (int i = 0; i < squarings; ++i) scale *= 0.5;
  Mat3<S> X = scale * A;
  Mat3<S> r = Mat3<S>::identity() + X;
  Mat3<S> term = X;
  for (int k = 2; k <= 14; ++k) {
    term = (1.0 / k) * (term * X);
    r = r + term;
  }
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

template <class S>
Sym3<S> expm_series(const Sym3<S>& A) {
  return sym(expm_series(A.full()));
}

UnitVector3 make_unit(double x, double y, double z);

inline double norm(const Vec3<double>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

inline double norm(const SymTensor3& m) { return std::sqrt(ddot(m, m)); }
inline double norm(const Tensor3& m) { return std::sqrt(ddot(m, m)); }

bool is_spd(const SymTensor3& A);

}  // namespace dn
