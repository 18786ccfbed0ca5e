#include "dissipnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace dn {

namespace {

// cyclic Jacobi sweeps; unconditionally convergent for symmetric 3x3
EigSym jacobi_eig(const SymTensor3& A) {
  double a[3][3] = {{A.a[0], A.a[3], A.a[4]},
                    {A.a[3], A.a[1], A.a[5]},
                    {A.a[4], A.a[5], A.a[2]}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-300) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        // G = rotation in the (p,q) plane; A <- G^T A G, V <- V G
        double g[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        g[p][p] = c;
        g[q][q] = c;
        g[p][q] = s;
        g[q][p] = -s;
        double tmp[3][3];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            tmp[i][j] = a[i][0] * g[0][j] + a[i][1] * g[1][j] + a[i][2] * g[2][j];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            a[i][j] = g[0][i] * tmp[0][j] + g[1][i] * tmp[1][j] + g[2][i] * tmp[2][j];
        for (int i = 0; i < 3; ++i) {
          double vp = v[i][p], vq = v[i][q];
          v[i][p] = vp * c - vq * s;
          v[i][q] = vp * s + vq * c;
        }
      }
    }
  }
  EigSym e;
  int order[3] = {0, 1, 2};
  double w[3] = {a[0][0], a[1][1], a[2][2]};
  std::sort(order, order + 3, [&](int x, int y) { return w[x] > w[y]; });
  for (int k = 0; k < 3; ++k) {
    e.w[k] = w[order[k]];
    for (int r = 0; r < 3; ++r) e.v[k][r] = v[r][order[k]];
  }
  return e;
}

}  // namespace

EigSym eig_sym(const SymTensor3& A) {
  // Cardano for the characteristic polynomial, then eigenvectors from
  // cross products of rows of (A - w I)
  double a11 = A.a[0], a22 = A.a[1], a33 = A.a[2];
  double a12 = A.a[3], a13 = A.a[4], a23 = A.a[5];
  double q = (a11 + a22 + a33) / 3.0;
  double b11 = a11 - q, b22 = a22 - q, b33 = a33 - q;
  double p2 = b11 * b11 + b22 * b22 + b33 * b33 +
              2.0 * (a12 * a12 + a13 * a13 + a23 * a23);
  double p = std::sqrt(p2 / 6.0);
  double scale = std::abs(a11) + std::abs(a22) + std::abs(a33) +
                 std::abs(a12) + std::abs(a13) + std::abs(a23);
  if (p <= 1e-14 * std::max(scale, 1.0)) {
    // (numerically) a multiple of the identity
    EigSym e;
    e.w = {q, q, q};
    e.v[0] = {1.0, 0.0, 0.0};
    e.v[1] = {0.0, 1.0, 0.0};
    e.v[2] = {0.0, 0.0, 1.0};
    return e;
  }
  // B = (A - q I)/p, r = det(B)/2 in [-1, 1]
  double ip = 1.0 / p;
  SymTensor3 B;
  B.a = {b11 * ip, b22 * ip, b33 * ip, a12 * ip, a13 * ip, a23 * ip};
  double r = 0.5 * det(B);
  r = std::clamp(r, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  double w0 = q + 2.0 * p * std::cos(phi);
  double w2 = q + 2.0 * p * std::cos(phi + 2.0943951023931953);
  double w1 = 3.0 * q - w0 - w2;

  double gap = std::min(std::abs(w0 - w1), std::abs(w1 - w2));
  if (gap < 1e-8 * std::max(scale, 1.0)) return jacobi_eig(A);

  EigSym e;
  e.w = {w0, w1, w2};
  Mat3<double> Af = A.full();
  for (int k = 0; k < 2; ++k) {
    Mat3<double> M = Af;
    M.a[0] -= e.w[k];
    M.a[4] -= e.w[k];
    M.a[8] -= e.w[k];
    Vec3<double> r0{M.a[0], M.a[1], M.a[2]};
    Vec3<double> r1{M.a[3], M.a[4], M.a[5]};
    Vec3<double> r2{M.a[6], M.a[7], M.a[8]};
    Vec3<double> c01 = cross(r0, r1);
    Vec3<double> c02 = cross(r0, r2);
    Vec3<double> c12 = cross(r1, r2);
    double n01 = dot(c01, c01), n02 = dot(c02, c02), n12 = dot(c12, c12);
    Vec3<double> best = c01;
    double nb = n01;
    if (n02 > nb) {
      best = c02;
      nb = n02;
    }
    if (n12 > nb) {
      best = c12;
      nb = n12;
    }
    if (nb <= 0.0) return jacobi_eig(A);
    double inv = 1.0 / std::sqrt(nb);
    e.v[k] = {best[0] * inv, best[1] * inv, best[2] * inv};
  }
  // enforce orthonormality: v1 -= (v1.v0) v0, v2 = v0 x v1
  double d01 = dot(e.v[1], e.v[0]);
  for (int r3 = 0; r3 < 3; ++r3) e.v[1][r3] -= d01 * e.v[0][r3];
  double n1 = norm(e.v[1]);
  if (n1 < 1e-6) return jacobi_eig(A);
  for (int r3 = 0; r3 < 3; ++r3) e.v[1][r3] /= n1;
  e.v[2] = cross(e.v[0], e.v[1]);

  // reconstruction guard
  SymTensor3 R = SymTensor3::zero();
  for (int k = 0; k < 3; ++k) {
    R.a[0] += e.w[k] * e.v[k][0] * e.v[k][0];
    R.a[1] += e.w[k] * e.v[k][1] * e.v[k][1];
    R.a[2] += e.w[k] * e.v[k][2] * e.v[k][2];
    R.a[3] += e.w[k] * e.v[k][0] * e.v[k][1];
    R.a[4] += e.w[k] * e.v[k][0] * e.v[k][2];
    R.a[5] += e.w[k] * e.v[k][1] * e.v[k][2];
  }
  if (norm(R - A) > 1e-12 * std::max(norm(A), 1.0)) return jacobi_eig(A);
  return e;
}

namespace {
SymTensor3 assemble(const EigSym& e, const std::array<double, 3>& f) {
  SymTensor3 r = SymTensor3::zero();
  for (int k = 0; k < 3; ++k) {
    r.a[0] += f[k] * e.v[k][0] * e.v[k][0];
    r.a[1] += f[k] * e.v[k][1] * e.v[k][1];
    r.a[2] += f[k] * e.v[k][2] * e.v[k][2];
    r.a[3] += f[k] * e.v[k][0] * e.v[k][1];
    r.a[4] += f[k] * e.v[k][0] * e.v[k][2];
    r.a[5] += f[k] * e.v[k][1] * e.v[k][2];
  }
  return r;
}
}  // namespace

SymTensor3 sqrt_spd(const SymTensor3& A) {
  EigSym e = eig_sym(A);
  if (e.w[2] <= 0.0)
    throw std::domain_error("sqrt_spd: input is not positive definite");
  return assemble(e, {std::sqrt(e.w[0]), std::sqrt(e.w[1]), std::sqrt(e.w[2])});
}

SymTensor3 expm_sym(const SymTensor3& A) {
  EigSym e = eig_sym(A);
  return assemble(e, {std::exp(e.w[0]), std::exp(e.w[1]), std::exp(e.w[2])});
}

Tensor3 rodrigues(const UnitVector3& n) {
  double c = n[0];  // cos(theta) = e1 . n
  if (c < -1.0 + 1e-12) {
    // antipodal: 180 degrees about e2
    return Tensor3::diag(-1.0, 1.0, -1.0);
  }
  Vec3<double> k{0.0, -n[2], n[1]};  // e1 x n (unnormalized), sin = |k|
  double s2 = k[1] * k[1] + k[2] * k[2];
  if (s2 < 1e-30) return Tensor3::identity();
  Tensor3 K = Tensor3::zero();
  K(0, 1) = -k[2];
  K(0, 2) = k[1];
  K(1, 0) = k[2];
  K(2, 0) = -k[1];
  // R = I + K + K^2 (1-c)/s^2 with unnormalized axis (|k| = sin theta)
  Tensor3 R = Tensor3::identity() + K + ((1.0 - c) / s2) * (K * K);
  return R;
}

UnitVector3 make_unit(double x, double y, double z) {
  double n = std::sqrt(x * x + y * y + z * z);
  if (n == 0.0) throw std::domain_error("make_unit: zero vector");
  return UnitVector3{x / n, y / n, z / n};
}

bool is_spd(const SymTensor3& A) {
  // Cholesky attempt
  double a = A.a[0];
  if (a <= 0.0) return false;
  double l00 = std::sqrt(a);
  double l10 = A.a[3] / l00;
  double l20 = A.a[4] / l00;
  double t = A.a[1] - l10 * l10;
  if (t <= 0.0) return false;
  double l11 = std::sqrt(t);
  double l21 = (A.a[5] - l20 * l10) / l11;
  double u = A.a[2] - l20 * l20 - l21 * l21;
  return u > 0.0;
}

}  // namespace dn
