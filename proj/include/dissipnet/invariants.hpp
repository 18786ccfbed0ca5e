#pragma once

#include <array>

#include "dissipnet/diff.hpp"
#include "dissipnet/tensor.hpp"

namespace dn {

// smoothing parameter of the modified roots
inline constexpr double kRootEps = 0.01;

// ---------------------------------------------------------------------------
// normalization functions

// beta1(A) = tr A - 3 - ln det A; finite only for det A > 0
template <class S>
S beta1(const Mat3<S>& A) {
  S d = det(A);
  if (value_of(d) <= 0.0)
    throw std::domain_error("beta1: argument has non-positive determinant");
  return trace(A) - 3.0 - log(d);
}

template <class S>
S beta1(const Sym3<S>& A) {
  return beta1(A.full());
}

template <class S>
S beta2(const S& a) {
  if (value_of(a) <= 0.0) throw std::domain_error("beta2: argument <= 0");
  return a - 1.0 - log(a);
}

// beta3 with a per-invariant reference trace: ln cosh(max(tr A - ref, 0))
template <class S>
S beta3_of_trace(const S& tr_a, double ref_trace) {
  S x = tr_a - ref_trace;
  if (value_of(x) <= 0.0) return S(0.0);
  return log_cosh(x);
}

template <class S>
S beta3(const Mat3<S>& A, double ref_trace) {
  return beta3_of_trace(trace(A), ref_trace);
}

// smoothed roots of App-style regularization: globally C^1, derivative at 0
// equal to eps^{-1/2} resp. eps^{-2/3}
template <class S>
S smoothed_sqrt(const S& x) {
  return x / sqrt(x + kRootEps);
}

template <class S>
S smoothed_cbrt(const S& x) {
  return x * pow_const(abs(x) + kRootEps, -2.0 / 3.0);
}

// exact cubic root; callers keep the argument bounded away from 0 when
// derivatives are taken
inline double exact_cbrt(double x) { return std::cbrt(x); }
template <class S, int K>
Dual<S, K> exact_cbrt(const Dual<S, K>& x) {
  S v = pow_const(abs(x.v), 1.0 / 3.0);
  double s = value_of(x.v) >= 0.0 ? 1.0 : -1.0;
  Dual<S, K> r;
  r.v = s * v;
  S df = (1.0 / 3.0) * pow_const(abs(x.v), -2.0 / 3.0);
  for (int k = 0; k < K; ++k) r.d[k] = df * x.d[k];
  return r;
}

// ---------------------------------------------------------------------------
// energy invariants T_psi = (S1..S10, A1..A5)

template <class S>
struct InvariantSetPsi {
  std::array<S, 15> v{};  // S1..S10, A1..A5
};

// Both sets in one pass; the anisotropic block shares the isotropic
// intermediates. M is the reference structural tensor n (x) n.
template <class S>
InvariantSetPsi<S> invariant_set_psi(const Sym3<S>& Cs, const Sym3<S>& Cis,
                                     const SymTensor3& M) {
  Mat3<S> C = Cs.full();
  Mat3<S> Ci = Cis.full();
  Mat3<S> Mm;
  for (int i = 0; i < 9; ++i) Mm.a[i] = S(M.full().a[i]);

  S detC = det(C);
  S detCi = det(Ci);
  if (value_of(detC) <= 0.0 || value_of(detCi) <= 0.0)
    throw std::domain_error("invariant_set_psi: inputs must be SPD");
  S J = sqrt(detC);
  S Ji = sqrt(detCi);
  const S& Ji2 = detCi;

  Mat3<S> cofC = cof(C);
  Mat3<S> Ciinv = inverse(Ci);
  Mat3<S> CCi = C * Ciinv;
  Mat3<S> CicofC = Ci * cofC;
  Mat3<S> CiM = Ci * Mm;

  S trC = trace(C);
  S trCi = trace(Ci);
  // tr(cof A) = ((tr A)^2 - tr(A^2))/2
  S trcofC = 0.5 * (trC * trC - trace_prod(C, C));
  S trcofCi = 0.5 * (trCi * trCi - trace_prod(Ci, Ci));

  InvariantSetPsi<S> t;
  // composite determinants follow from det multiplicativity
  t.v[0] = trace_prod(C, Ciinv) - 3.0 - log(detC / detCi);            // S1
  t.v[1] = (S(1.0) / Ji2) * trace(CicofC) - 3.0 -
           log((detC * detC) / (detCi * detCi));                      // S2
  t.v[2] = beta2(J / Ji);                                             // S3
  t.v[3] = trCi - 3.0 - log(detCi);                                   // S4
  t.v[4] = trcofCi - 3.0 - log(detCi * detCi);                        // S5
  t.v[5] = beta2(J);                                                  // S6
  t.v[6] = trC - 3.0 - log(detC);                                     // S7
  t.v[7] = trcofC - 3.0 - log(detC * detC);                           // S8
  t.v[8] = beta3_of_trace((S(1.0) / Ji2) * trace_prod(CicofC, Ci), 3.0);
  t.v[9] = beta3_of_trace(Ji2 * trace_prod(CCi, Ciinv), 3.0);         // S10

  S CidM = trace_prod(Ci, Mm);  // Ci : M
  t.v[10] = beta3_of_trace(trace_prod(C, Mm) / CidM, 1.0);                // A1
  t.v[11] = beta3_of_trace(trace_prod(CicofC, CiM) / (Ji2 * CidM), 1.0);  // A2
  t.v[12] = beta3_of_trace(trace_prod(Ci, CiM) / CidM, 1.0);              // A3
  t.v[13] = beta3_of_trace(Ji2 / CidM, 1.0);                              // A4
  Mat3<S> H = outer_hash(Ci, (S(1.0) / CidM) * (Mm * Ci));
  t.v[14] = beta3_of_trace(trace_prod(CCi, H), 2.0);                      // A5
  return t;
}

// spec-facing wrappers
template <class S>
std::array<S, 10> iso_set_psi(const Sym3<S>& C, const Sym3<S>& Ci) {
  auto t = invariant_set_psi(C, Ci, SymTensor3::diag(1.0, 0.0, 0.0));
  std::array<S, 10> r;
  for (int i = 0; i < 10; ++i) r[i] = t.v[i];
  return r;
}

template <class S>
std::array<S, 5> aniso_set_psi(const Sym3<S>& C, const Sym3<S>& Ci,
                               const SymTensor3& M) {
  auto t = invariant_set_psi(C, Ci, M);
  std::array<S, 5> r;
  for (int i = 0; i < 5; ++i) r[i] = t.v[10 + i];
  return r;
}

// ---------------------------------------------------------------------------
// dual-potential invariants T_phi = (S1,S2,S3, A11,A12,A21,A22,A3,A4)

template <class S>
struct InvariantSetPhi {
  std::array<S, 9> v{};
};

enum class Roots { Exact, Smoothed };

template <class S>
InvariantSetPhi<S> invariant_set_phi(const Sym3<S>& Sigs, const Vec3<S>& v1,
                                     const Vec3<S>& v2, Roots roots) {
  Mat3<S> Sig = Sigs.full();
  Mat3<S> d = dev(Sig);
  Mat3<S> d2 = d * d;

  Vec3<S> dn1 = d * v1;
  Vec3<S> dn2 = d * v2;
  Vec3<S> sn1 = Sig * v1;
  Vec3<S> sn2 = Sig * v2;

  auto root2 = [&](const S& x) -> S {
    if (roots == Roots::Smoothed) return smoothed_sqrt(x);
    return value_of(x) > 0.0 ? sqrt(x) : S(0.0);
  };

  InvariantSetPhi<S> t;
  t.v[0] = trace(Sig);
  S s2p = 0.5 * trace(d2);
  t.v[1] = root2(s2p);
  S s3p = (1.0 / 3.0) * trace_prod(d2, d);
  t.v[2] = roots == Roots::Smoothed ? smoothed_cbrt(s3p) : exact_cbrt(s3p);
  t.v[3] = dot(dn1, v1);                 // A11 = dev Sig : n1 (x) n1
  t.v[4] = dot(dn2, v2);                 // A12
  t.v[5] = root2(S(0.5) * dot(dn1, dn1));  // A21
  t.v[6] = root2(S(0.5) * dot(dn2, dn2));  // A22
  t.v[7] = 0.5 * (dot(sn1, v2) + dot(sn2, v1));  // A3 = Sig : sym(n1 (x) n2)
  // A4 radicand can be negative (sym(n1(x)n2) indefinite); clamp before root
  S rad = relu(S(0.5) * dot(sn1, sn2));
  t.v[8] = root2(rad);
  return t;
}

template <class S>
Vec3<S> promote_vec(const Vec3<double>& n) {
  return Vec3<S>{S(n[0]), S(n[1]), S(n[2])};
}

// spec-facing wrappers
template <class S>
std::array<S, 3> stress_invariants(const Sym3<S>& Sig, Roots roots) {
  Vec3<S> e1 = promote_vec<S>(Vec3<double>{1, 0, 0});
  auto t = invariant_set_phi(Sig, e1, e1, roots);
  return {t.v[0], t.v[1], t.v[2]};
}

template <class S>
std::array<S, 6> aniso_stress_invariants(const Sym3<S>& Sig,
                                         const Vec3<double>& n1,
                                         const Vec3<double>& n2, Roots roots) {
  auto t = invariant_set_phi(Sig, promote_vec<S>(n1), promote_vec<S>(n2), roots);
  return {t.v[3], t.v[4], t.v[5], t.v[6], t.v[7], t.v[8]};
}

// co-rotated push-forwards of the structural direction,
// n1 = Ui n / |Ui n|, n2 = cof(Ui) n / |cof(Ui) n|
inline std::pair<UnitVector3, UnitVector3> pushforward_vectors(
    const SymTensor3& Ui, const UnitVector3& n) {
  Tensor3 U = Ui.full();
  Vec3<double> a = U * n;
  Vec3<double> b = cof(U) * n;
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::domain_error("pushforward_vectors: degenerate stretch");
  return {UnitVector3{a[0] / na, a[1] / na, a[2] / na},
          UnitVector3{b[0] / nb, b[1] / nb, b[2] / nb}};
}

}  // namespace dn
