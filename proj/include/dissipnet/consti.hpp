#pragma once

#include <functional>

#include "dissipnet/invariants.hpp"
#include "dissipnet/nets.hpp"

namespace dn {

// default growth-penalty weight
inline constexpr double kLambdaGr = 1e-4;

// network topology of the constitutive model (array indices into one
// ParamVector shared by all three networks)
struct Topology {
  TwoBranchNet psi;    // ICNN over T_psi
  TwoBranchNet phi_c;  // ICNN part of the dual-potential composition
  TwoBranchNet phi_m;  // IMNN part
  MlpNet alpha;        // auxiliary LiNN modulation net
  MlpNet fsrc;         // auxiliary LiNN source net
  int seam = 4;        // ICNN/IMNN seam width
};

// the paper-configuration networks: psi 15-16-16-16-16-1, dual potential
// 18-16-16-16-4 (ReLU head) into 4-16-16-16-1, auxiliary nets 18-12-12-8-8-6
Topology build_default_topology(ParamVector& pv, int seam = 4);

// internal state of one material point
struct MaterialState {
  SymTensor3 Ui = SymTensor3::identity();
  std::array<double, 6> h{};
  double t = 0.0;
};

struct StepInput {
  SymTensor3 C_next;
  SymTensor3 C_prev = SymTensor3::identity();  // explicit staggering uses C_n
  double dt = 0.0;
};

// ---------------------------------------------------------------------------
// network-backed constitutive functions, generic over the parameter scalar.
// Stress-like gradients are assembled as (net input-gradient) x (invariant
// Jacobian); the net gradient comes from a hand-written backward pass and
// the invariant Jacobian from forward tangents.

// psi = N_c(T_psi) + lambda_gr (beta2(J) + beta2(J/Ji)); operates in
// stress-normalized units (outputs are normalized second PK stresses)
template <class S>
S helmholtz(const Topology& topo, const ParamsT<S>& P, const Sym3<S>& C,
            const Sym3<S>& Ci, const SymTensor3& M,
            double lambda_gr = kLambdaGr) {
  auto T = invariant_set_psi(C, Ci, M);
  std::vector<S> y(T.v.begin(), T.v.end());
  auto out = icnn_forward(topo.psi, P, std::span<const S>(),
                          std::span<const S>(y));
  S J = sqrt(det(C));
  S Ji = sqrt(det(Ci));
  return out.z[0] + lambda_gr * (beta2(J) + beta2(J / Ji));
}

namespace detail {

template <class S, int K>
struct PsiDuals {
  InvariantSetPsi<Dual<S, K>> T;
  Dual<S, K> pen;
};

template <int K, class S>
PsiDuals<S, K> psi_duals(const Sym3<Dual<S, K>>& C, const Sym3<Dual<S, K>>& Ci,
                         const SymTensor3& M, double lambda_gr) {
  PsiDuals<S, K> r;
  r.T = invariant_set_psi(C, Ci, M);
  auto J = sqrt(det(C));
  auto Ji = sqrt(det(Ci));
  r.pen = lambda_gr * (beta2(J) + beta2(J / Ji));
  return r;
}

// contract the net input-gradient with the invariant tangents into a
// symmetric tensor (Voigt off-diagonals halved so that df = g : dX)
template <class S, int K>
Sym3<S> assemble_sym_grad(const std::vector<S>& dy,
                          const PsiDuals<S, K>& parts, int first_slot) {
  Sym3<S> g;
  S xs[16], ys[16];
  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 15; ++k) {
      xs[k] = dy[k];
      ys[k] = parts.T.v[k].d[first_slot + j];
    }
    xs[15] = S(1.0);
    ys[15] = parts.pen.d[first_slot + j];
    S d = dotn(xs, ys, 16);
    g.a[j] = j < 3 ? d : S(0.5) * d;
  }
  return g;
}

}  // namespace detail

// S = 2 dpsi/dC (normalized units)
template <class S>
Sym3<S> second_pk_stress(const Topology& topo, const ParamsT<S>& P,
                         const Sym3<S>& C, const Sym3<S>& Ci,
                         const SymTensor3& M, double lambda_gr = kLambdaGr) {
  auto parts = detail::psi_duals<6>(seed_tangents<6>(C, 0), promote<6>(Ci), M,
                                    lambda_gr);
  std::vector<S> y(15);
  for (int k = 0; k < 15; ++k) y[k] = parts.T.v[k].v;
  auto vjp = two_branch_scalar_vjp(topo.psi, P, std::span<const S>(y));
  if (!isfinite_value(vjp.value))
    throw EvalError("second_pk_stress: non-finite psi");
  return 2.0 * detail::assemble_sym_grad(vjp.dy, parts, 0);
}

// driving force in the co-rotated configuration, Sigma = -2 Ui dpsi/dCi Ui
template <class S>
Sym3<S> driving_force(const Topology& topo, const ParamsT<S>& P,
                      const Sym3<S>& C, const Sym3<S>& Ci, const Sym3<S>& Ui,
                      const SymTensor3& M, double lambda_gr = kLambdaGr) {
  auto parts = detail::psi_duals<6>(promote<6>(C), seed_tangents<6>(Ci, 0), M,
                                    lambda_gr);
  std::vector<S> y(15);
  for (int k = 0; k < 15; ++k) y[k] = parts.T.v[k].v;
  auto vjp = two_branch_scalar_vjp(topo.psi, P, std::span<const S>(y));
  if (!isfinite_value(vjp.value))
    throw EvalError("driving_force: non-finite psi");
  Sym3<S> G = detail::assemble_sym_grad(vjp.dy, parts, 0);
  return (-2.0) * sym(Ui.full() * G.full() * Ui.full());
}

// one invariant pass and one net pass for both stress and driving force
template <class S>
std::pair<Sym3<S>, Sym3<S>> stress_and_driving(const Topology& topo,
                                               const ParamsT<S>& P,
                                               const Sym3<S>& C,
                                               const Sym3<S>& Ci,
                                               const Sym3<S>& Ui,
                                               const SymTensor3& M,
                                               double lambda_gr = kLambdaGr) {
  auto Cd = seed_tangents<12>(C, 0);
  auto Cid = seed_tangents<12>(Ci, 6);
  auto parts = detail::psi_duals<12>(Cd, Cid, M, lambda_gr);
  std::vector<S> y(15);
  for (int k = 0; k < 15; ++k) y[k] = parts.T.v[k].v;
  auto vjp = two_branch_scalar_vjp(topo.psi, P, std::span<const S>(y));
  if (!isfinite_value(vjp.value))
    throw EvalError("stress_and_driving: non-finite psi");
  Sym3<S> gC = detail::assemble_sym_grad(vjp.dy, parts, 0);
  Sym3<S> gCi = detail::assemble_sym_grad(vjp.dy, parts, 6);
  Sym3<S> Sig = (-2.0) * sym(Ui.full() * gCi.full() * Ui.full());
  return {2.0 * gC, Sig};
}

// co-rotated structural push-forwards for a generic scalar
template <class S>
std::pair<Vec3<S>, Vec3<S>> pushforward_generic(const Sym3<S>& Ui,
                                                const UnitVector3& n) {
  Mat3<S> U = Ui.full();
  Vec3<S> nn;
  for (int i = 0; i < 3; ++i) nn[i] = S(n[i]);
  Vec3<S> a = U * nn;
  Vec3<S> b = cof(U) * nn;
  S na = sqrt(dot(a, a));
  S nb = sqrt(dot(b, b));
  Vec3<S> n1, n2;
  for (int i = 0; i < 3; ++i) {
    n1[i] = a[i] / na;
    n2[i] = b[i] / nb;
  }
  return {n1, n2};
}

// inelastic flow D = (1/J) [dphi](T_phi/J) : dT_phi/dSigma, realized as the
// Sigma-gradient of phi(T_phi(Sigma)/J); smoothed roots
template <class S>
Sym3<S> flow_rate(const Topology& topo, const ParamsT<S>& P,
                  const Sym3<S>& Sig, const Vec3<S>& n1, const Vec3<S>& n2,
                  const S& J) {
  if (value_of(J) <= 0.0) throw std::domain_error("flow_rate: J <= 0");
  using D = Dual<S, 6>;
  auto Sd = seed_tangents<6>(Sig, 0);
  Vec3<D> n1d, n2d;
  for (int i = 0; i < 3; ++i) {
    n1d[i] = D(n1[i]);
    n2d[i] = D(n2[i]);
  }
  auto T = invariant_set_phi(Sd, n1d, n2d, Roots::Smoothed);
  D inv_j = D(S(1.0) / J);
  std::array<D, 18> yd;
  for (int k = 0; k < 9; ++k) {
    yd[k] = inv_j * T.v[k];
    yd[9 + k] = -yd[k];
  }
  std::vector<S> y(18);
  for (int k = 0; k < 18; ++k) y[k] = yd[k].v;
  auto vjp =
      compose_scalar_vjp(topo.phi_c, topo.phi_m, P, std::span<const S>(y));
  if (!isfinite_value(vjp.value)) throw EvalError("flow_rate: non-finite phi");
  Sym3<S> Dout;
  S xs[18], ys[18];
  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 18; ++k) {
      xs[k] = vjp.dy[k];
      ys[k] = yd[k].d[j];
    }
    S d = dotn(xs, ys, 18);
    Dout.a[j] = j < 3 ? d : S(0.5) * d;
  }
  return Dout;
}

// value of the dual potential (diagnostics and property tests)
template <class S>
S dual_potential(const Topology& topo, const ParamsT<S>& P, const Sym3<S>& Sig,
                 const Vec3<S>& n1, const Vec3<S>& n2, const S& J) {
  auto T = invariant_set_phi(Sig, n1, n2, Roots::Smoothed);
  S inv_j = S(1.0) / J;
  std::vector<S> y(18);
  for (int k = 0; k < 9; ++k) {
    y[k] = inv_j * T.v[k];
    y[9 + k] = -y[k];
  }
  return compose_forward(topo.phi_c, topo.phi_m, P, std::span<const S>(),
                         std::span<const S>(y));
}

// ---------------------------------------------------------------------------
// material-point stepping, generic over the scalar so the training loop and
// the double-facing evaluation share one implementation

template <class S>
struct StateT {
  Sym3<S> Ui = Sym3<S>::identity();
  std::array<S, 6> h{};
};

// trial rate: flow evaluated with C_{n+1} but frozen internal variables
template <class S>
Sym3<S> trial_rate(const Topology& topo, const ParamsT<S>& P,
                   const StateT<S>& st, const Sym3<S>& C_next,
                   const SymTensor3& M, const UnitVector3& n,
                   double lambda_gr = kLambdaGr) {
  Sym3<S> Ci = sym(st.Ui.full() * st.Ui.full());
  Sym3<S> Sig = driving_force(topo, P, C_next, Ci, st.Ui, M, lambda_gr);
  auto [n1, n2] = pushforward_generic(st.Ui, n);
  S J = sqrt(det(C_next));
  return flow_rate(topo, P, Sig, n1, n2, J);
}

// LiNN update: q = (E_{n+1}, clip(D_trial)), h' by the Euler cell,
// U' from the Cholesky state map
template <class S>
StateT<S> update_linn(const Topology& topo, const ParamsT<S>& P,
                      const StateT<S>& st, const Sym3<S>& C_next, double dt,
                      const SymTensor3& M, const UnitVector3& n,
                      LinnScheme scheme = LinnScheme::Euler,
                      double lambda_gr = kLambdaGr) {
  Sym3<S> Dtr = trial_rate(topo, P, st, C_next, M, n, lambda_gr);
  std::array<S, 18> q_in;
  for (int k = 0; k < 6; ++k) {
    q_in[k] = st.h[k];
    S e = 0.5 * (C_next.a[k] - (k < 3 ? 1.0 : 0.0));
    q_in[6 + k] = e;
    q_in[12 + k] = clamp(Dtr.a[k], -1e3, 1e3);  // guards the GELU stacks
  }
  std::array<S, 6> alpha, f;
  mlp_forward(topo.alpha, P, q_in.data(), 18, alpha.data());
  mlp_forward(topo.fsrc, P, q_in.data(), 18, f.data());
  StateT<S> out;
  out.h = linn_step_update(st.h, alpha, f, dt, scheme);
  out.Ui = cholesky_from_states(out.h);
  return out;
}

// residual of the implicit exponential update,
// r = C_{i,n} - U_{n+1} exp(-2 dt D_{n+1}) U_{n+1}
template <class S>
Sym3<S> implicit_residual(const Topology& topo, const ParamsT<S>& P,
                          const StateT<S>& prev, const StateT<S>& next,
                          const Sym3<S>& C_next, double dt,
                          const SymTensor3& M, const UnitVector3& n,
                          double lambda_gr = kLambdaGr) {
  Sym3<S> Ci_prev = sym(prev.Ui.full() * prev.Ui.full());
  Sym3<S> Ci_next = sym(next.Ui.full() * next.Ui.full());
  Sym3<S> Sig = driving_force(topo, P, C_next, Ci_next, next.Ui, M, lambda_gr);
  auto [n1, n2] = pushforward_generic(next.Ui, n);
  S J = sqrt(det(C_next));
  Sym3<S> D = flow_rate(topo, P, Sig, n1, n2, J);
  Mat3<S> E = expm_series(((-2.0) * dt) * D.full());
  return Ci_prev - sym(next.Ui.full() * E * next.Ui.full());
}

// ---------------------------------------------------------------------------
// double-facing stepping (explicit update needs sqrt_spd)

enum class UpdateMode { Linn, Explicit };

struct NetModel {
  Topology topo;
  ParamVector params;
  UnitVector3 n{1.0, 0.0, 0.0};
  double lambda_gr = kLambdaGr;
  double stress_scale = 1.0;  // S-bar (MPa); predictions are S/S-bar
  LinnScheme scheme = LinnScheme::Euler;

  SymTensor3 M() const { return sym(outer(n, n)); }
};

// Plug-in surface: the same stepping mechanics driven either by the networks
// or by closed-form reference potentials. `flow(C, Ci, Ui)` evaluates the
// driving force and the dual-potential gradient at the given configuration.
// The hooks reference external storage and must not outlive their model.
struct PointHooks {
  std::function<SymTensor3(const SymTensor3& C, const SymTensor3& Ci)> stress;
  std::function<SymTensor3(const SymTensor3& C, const SymTensor3& Ci,
                           const SymTensor3& Ui)>
      flow;
};

PointHooks net_hooks(const NetModel& m);

MaterialState update_explicit_hooks(const PointHooks& h,
                                    const MaterialState& st,
                                    const StepInput& in);
std::pair<MaterialState, SymTensor3> material_point_step_hooks(
    const PointHooks& h, const MaterialState& st, const StepInput& in);
std::vector<SymTensor3> simulate_path_hooks(const PointHooks& h,
                                            const std::vector<SymTensor3>& Cs,
                                            const std::vector<double>& dts);

// explicit exponential update; the flow is evaluated at (C_n, C_{i,n})
MaterialState update_explicit(const NetModel& m, const MaterialState& st,
                              const StepInput& in);

MaterialState update_linn_state(const NetModel& m, const MaterialState& st,
                                const StepInput& in);

std::pair<MaterialState, SymTensor3> material_point_step(const NetModel& m,
                                                         const MaterialState& st,
                                                         const StepInput& in,
                                                         UpdateMode mode);

// folds material_point_step from the natural state; one stress per input C
std::vector<SymTensor3> simulate_path(const NetModel& m,
                                      const std::vector<SymTensor3>& Cs,
                                      const std::vector<double>& dts,
                                      UpdateMode mode);

}  // namespace dn
