#pragma once

#include "dissipnet/consti.hpp"
#include "dissipnet/dataset.hpp"

namespace dn {

// Three-element reference material: an equilibrium spring in parallel with a
// spring-dashpot branch; anisotropy through a metric tensor. Serves as the
// data-generating oracle and as a plug-in replacement for the networks.
struct RefParams {
  double a_eq = 80.0, b_eq = 100.0, c_eq = 100.0;     // MPa
  double a_neq = 40.0, b_neq = 50.0, c_neq = 50.0;    // MPa
  double alpha_eq = 2.0, eta_eq = 10.0;               // -, MPa
  double alpha_neq = 2.0, eta_neq = 10.0;             // -, MPa
  double beta = 2.0;                                  // metric anisotropy
  double tau = 12.0;                                  // s

  static double d1(double a, double b, double c) { return 2 * a + 4 * b + 2 * c; }
  static double d2(double eta) { return 2 * eta; }
};

// G = R diag(beta^2, 1/beta, 1/beta) R^T with R e1 = n; det G = 1
Tensor3 metric_tensor(const UnitVector3& n, double beta);

template <class S>
S second_invariant(const Mat3<S>& m) {
  return 0.5 * (trace(m) * trace(m) - trace(m * m));
}

// psi_iso(A) = a trA + b tr cofA + c detA - d1/2 ln detA, elastic argument
// realized through invariants of C Ci^{-1}; anisotropic branches in
// referential form (the covariant push-forward cancels F_i exactly)
template <class S>
S ref_psi(const Sym3<S>& Cs, const Sym3<S>& Cis, const RefParams& rp,
          const Tensor3& G, bool iso_only) {
  Mat3<S> C = Cs.full();
  Mat3<S> Ci = Cis.full();
  S detC = det(C);
  S detCi = det(Ci);
  if (value_of(detC) <= 0.0 || value_of(detCi) <= 0.0)
    throw std::domain_error("ref_psi: inputs must be SPD");
  Mat3<S> Gm;
  for (int i = 0; i < 9; ++i) Gm.a[i] = S(G.a[i]);

  // equilibrium spring on C
  S psi = rp.a_eq * trace(C) + rp.b_eq * second_invariant(C) +
          rp.c_eq * detC -
          0.5 * RefParams::d1(rp.a_eq, rp.b_eq, rp.c_eq) * log(detC);
  // non-equilibrium spring on Ce ~ C Ci^{-1}
  Mat3<S> CCi = C * inverse(Ci);
  S dete = detC / detCi;
  psi += rp.a_neq * trace(CCi) + rp.b_neq * second_invariant(CCi) +
         rp.c_neq * dete -
         0.5 * RefParams::d1(rp.a_neq, rp.b_neq, rp.c_neq) * log(dete);
  if (iso_only) return psi;

  // anisotropic equilibrium branch: arguments (C, G)
  {
    double al = rp.alpha_eq, eta = rp.eta_eq;
    S trCG = trace(C * Gm);
    S trcofCG = trace(cof(C) * Gm);
    double trG = trace(G);
    psi += eta / (al * std::pow(trG, al)) *
               (pow_const(trCG, al) + pow_const(trcofCG, al)) -
           0.5 * RefParams::d2(eta) * log(detC);
  }
  // anisotropic non-equilibrium branch in referential quantities:
  // tr(Ce Gt) = tr(C G), tr(cof Ce Gt) = tr(cof C Ci G Ci)/det Ci,
  // tr Gt = tr(G Ci), det Ce = det C / det Ci
  {
    double al = rp.alpha_neq, eta = rp.eta_neq;
    S trGt = trace(Gm * Ci);
    S t1 = trace(C * Gm);
    S t2 = trace(cof(C) * (Ci * (Gm * Ci))) / detCi;
    psi += eta / al * pow_const(trGt, -al) *
               (pow_const(t1, al) + pow_const(t2, al)) -
           0.5 * RefParams::d2(eta) * log(dete);
  }
  return psi;
}

// dual potential; M3 is the co-rotated mixed-variant structural map
// Ui M Ui^{-1} (identity rotational part)
template <class S>
S ref_phi(const Sym3<S>& Sigs, const Mat3<S>& M3, const RefParams& rp,
          bool iso_only) {
  Mat3<S> Sig = Sigs.full();
  S trS = trace(Sig);
  Mat3<S> d = dev(Sig);
  S phi = (1.0 / rp.tau) *
          ((1.0 / 18.0) * trS * trS / rp.c_neq +
           (2.0 / (rp.a_neq + rp.b_neq)) * (0.5 * trace(d * d)));
  if (iso_only) return phi;
  S trSM = trace(Sig * M3);
  S trS2M = trace(Sig * Sig * M3);
  phi += (1.0 / (2.0 * rp.eta_neq * rp.tau)) * (trSM * trSM + trS2M);
  return phi;
}

// analytic gradient of ref_phi with respect to (symmetric) Sigma
SymTensor3 ref_flow(const SymTensor3& Sig, const Tensor3& M3,
                    const RefParams& rp, bool iso_only);

struct RefModel {
  RefParams p;
  UnitVector3 n{1.0, 0.0, 0.0};
  bool iso_only = true;
  Tensor3 G = Tensor3::identity();

  static RefModel make(const RefParams& p, const UnitVector3& n,
                       bool iso_only) {
    RefModel m;
    m.p = p;
    m.n = n;
    m.iso_only = iso_only;
    m.G = metric_tensor(n, p.beta);
    return m;
  }

  SymTensor3 stress(const SymTensor3& C, const SymTensor3& Ci) const;
  SymTensor3 sigbar(const SymTensor3& C, const SymTensor3& Ci,
                    const SymTensor3& Ui) const;
  SymTensor3 flow(const SymTensor3& C, const SymTensor3& Ci,
                  const SymTensor3& Ui) const;
  PointHooks hooks() const;  // plug-in surface for the consti machinery
};

// one explicit exponential step of the reference model (flow at t_n)
std::pair<MaterialState, SymTensor3> ref_step(const RefModel& m,
                                              const MaterialState& st,
                                              const StepInput& in);

// deformation-path programs: ramp/hold/unload schedules on homogeneous modes
// and seeded smooth random walks with a determinant guard
struct PathSpec {
  enum class Kind { Program, RandomWalk };
  Kind kind = Kind::Program;
  int steps = 120;
  double dt = 0.05;
  uint64_t seed = 0;
};

std::vector<SymTensor3> generate_path(const PathSpec& spec);

Dataset generate_dataset(int n_paths, int steps, double dt, bool iso_only,
                         const UnitVector3& n, uint64_t seed);

}  // namespace dn
