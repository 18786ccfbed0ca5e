#include "dissipnet/consti.hpp"

namespace dn {

Topology build_default_topology(ParamVector& pv, int seam) {
  Topology t;
  t.seam = seam;
  t.psi = build_two_branch(
      pv, TwoBranchSpec{0,
                        15,
                        {16, 16, 16, 16, 1},
                        {Activation::Exp, Activation::Softplus,
                         Activation::Softplus, Activation::Softplus,
                         Activation::Softplus},
                        {},
                        {},
                        "psi"});
  t.phi_c = build_two_branch(
      pv, TwoBranchSpec{0,
                        18,
                        {16, 16, 16, seam},
                        {Activation::Exp, Activation::Relu, Activation::Relu,
                         Activation::Relu},
                        {},
                        {},
                        "phi_c"});
  t.phi_m = build_two_branch(
      pv, TwoBranchSpec{0,
                        seam,
                        {16, 16, 16, 1},
                        {Activation::Tanh, Activation::Tanh,
                         Activation::Softplus, Activation::Linear},
                        {},
                        {},
                        "phi_m"});
  t.alpha = build_mlp(
      pv, MlpSpec{18,
                  {12, 12, 8, 8, 6},
                  {Activation::Gelu, Activation::Gelu, Activation::Gelu,
                   Activation::Gelu, Activation::Relu},
                  true,
                  "alpha"});
  t.fsrc = build_mlp(
      pv, MlpSpec{18,
                  {12, 12, 8, 8, 6},
                  {Activation::Gelu, Activation::Gelu, Activation::Gelu,
                   Activation::Gelu, Activation::Linear},
                  true,
                  "fsrc"});
  return t;
}

PointHooks net_hooks(const NetModel& m) {
  PointHooks h;
  const Topology& topo = m.topo;
  const ParamVector& P = m.params;
  SymTensor3 M = m.M();
  UnitVector3 n = m.n;
  double lg = m.lambda_gr;
  h.stress = [&topo, &P, M, lg](const SymTensor3& C, const SymTensor3& Ci) {
    return second_pk_stress(topo, P, C, Ci, M, lg);
  };
  h.flow = [&topo, &P, M, n, lg](const SymTensor3& C, const SymTensor3& Ci,
                                 const SymTensor3& Ui) {
    Sym3<double> Sig = driving_force(topo, P, C, Ci, Ui, M, lg);
    auto [n1, n2] = pushforward_generic(Ui, n);
    double J = std::sqrt(det(C));
    return flow_rate(topo, P, Sig, n1, n2, J);
  };
  return h;
}

MaterialState update_explicit_hooks(const PointHooks& h,
                                    const MaterialState& st,
                                    const StepInput& in) {
  SymTensor3 Ci = sym(st.Ui.full() * st.Ui.full());
  SymTensor3 D = h.flow(in.C_prev, Ci, st.Ui);
  Mat3<double> E = expm_sym((2.0 * in.dt) * D).full();
  SymTensor3 Ci_next = sym(st.Ui.full() * E * st.Ui.full());
  MaterialState out = st;
  out.Ui = sqrt_spd(Ci_next);
  out.t = st.t + in.dt;
  return out;
}

MaterialState update_explicit(const NetModel& m, const MaterialState& st,
                              const StepInput& in) {
  return update_explicit_hooks(net_hooks(m), st, in);
}

MaterialState update_linn_state(const NetModel& m, const MaterialState& st,
                                const StepInput& in) {
  StateT<double> s;
  s.Ui = st.Ui;
  s.h = st.h;
  StateT<double> nx = update_linn(m.topo, m.params, s, in.C_next, in.dt, m.M(),
                                  m.n, m.scheme, m.lambda_gr);
  MaterialState out;
  out.Ui = nx.Ui;
  out.h = nx.h;
  out.t = st.t + in.dt;
  return out;
}

std::pair<MaterialState, SymTensor3> material_point_step_hooks(
    const PointHooks& h, const MaterialState& st, const StepInput& in) {
  MaterialState next = update_explicit_hooks(h, st, in);
  SymTensor3 Ci = sym(next.Ui.full() * next.Ui.full());
  return {next, h.stress(in.C_next, Ci)};
}

std::pair<MaterialState, SymTensor3> material_point_step(const NetModel& m,
                                                         const MaterialState& st,
                                                         const StepInput& in,
                                                         UpdateMode mode) {
  MaterialState next = mode == UpdateMode::Linn ? update_linn_state(m, st, in)
                                                : update_explicit(m, st, in);
  SymTensor3 Ci = sym(next.Ui.full() * next.Ui.full());
  SymTensor3 S =
      second_pk_stress(m.topo, m.params, in.C_next, Ci, m.M(), m.lambda_gr);
  return {next, S};
}

std::vector<SymTensor3> simulate_path(const NetModel& m,
                                      const std::vector<SymTensor3>& Cs,
                                      const std::vector<double>& dts,
                                      UpdateMode mode) {
  if (Cs.size() != dts.size())
    throw std::invalid_argument("simulate_path: size mismatch");
  std::vector<SymTensor3> out;
  out.reserve(Cs.size());
  MaterialState st;
  for (size_t k = 0; k < Cs.size(); ++k) {
    StepInput in;
    in.C_next = Cs[k];
    in.C_prev = k ? Cs[k - 1] : SymTensor3::identity();
    in.dt = dts[k];
    try {
      auto [next, S] = material_point_step(m, st, in, mode);
      st = next;
      out.push_back(S);
    } catch (const std::exception& e) {
      throw EvalError(std::string("simulate_path: step ") + std::to_string(k) +
                          ": " + e.what(),
                      -1, static_cast<int>(k));
    }
  }
  return out;
}

std::vector<SymTensor3> simulate_path_hooks(const PointHooks& h,
                                            const std::vector<SymTensor3>& Cs,
                                            const std::vector<double>& dts) {
  std::vector<SymTensor3> out;
  out.reserve(Cs.size());
  MaterialState st;
  for (size_t k = 0; k < Cs.size(); ++k) {
    StepInput in;
    in.C_next = Cs[k];
    in.C_prev = k ? Cs[k - 1] : SymTensor3::identity();
    in.dt = dts[k];
    auto [next, S] = material_point_step_hooks(h, st, in);
    st = next;
    out.push_back(S);
  }
  return out;
}

}  // namespace dn
