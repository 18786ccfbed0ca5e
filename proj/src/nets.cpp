#include "dissipnet/nets.hpp"

#include <cmath>

namespace dn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Exp:
      return "exp";
    case Activation::Softplus:
      return "softplus";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Gelu:
      return "gelu";
    case Activation::Linear:
      return "linear";
  }
  return "linear";
}

Activation activation_from_name(const std::string& s) {
  if (s == "exp") return Activation::Exp;
  if (s == "softplus") return Activation::Softplus;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "gelu") return Activation::Gelu;
  if (s == "linear") return Activation::Linear;
  throw std::invalid_argument("unknown activation: " + s);
}

TwoBranchNet build_two_branch(ParamVector& pv, TwoBranchSpec spec) {
  TwoBranchNet net;
  const int L = static_cast<int>(spec.widths.size());
  if (static_cast<int>(spec.acts.size()) != L)
    throw std::invalid_argument(spec.prefix + ": one activation per layer");
  net.Wz.resize(L, -1);
  net.Wy.resize(L, -1);
  net.gy.resize(L, -1);
  net.gz.resize(L, -1);
  net.b.resize(L, -1);
  net.Wzu.resize(L, -1);
  net.Wyu.resize(L, -1);
  net.Wu.resize(L, -1);
  net.uW.resize(L, -1);
  net.ub.resize(L, -1);
  int nu = spec.nx;
  for (int l = 0; l < L; ++l) {
    const std::string p = spec.prefix + ".L" + std::to_string(l) + ".";
    const std::string act = activation_name(spec.acts[l]);
    const int m = spec.widths[l];
    const int pz = l ? spec.widths[l - 1] : 0;
    if (pz > 0) {
      net.Wz[l] = pv.add(p + "Wz", {m, pz}, Constraint::NonNeg, act);
      net.gz[l] = pv.add(p + "gz", {pz}, Constraint::Free, act, 0.5);
    }
    net.Wy[l] = pv.add(p + "Wy", {m, spec.ny}, Constraint::NonNeg, act);
    net.gy[l] = pv.add(p + "gy", {spec.ny}, Constraint::Free, act, 0.5);
    net.b[l] = pv.add(p + "b", {m}, Constraint::Free, act, 0.5);
    if (nu > 0) {
      net.Wu[l] = pv.add(p + "Wu", {m, nu}, Constraint::Free, act);
      net.Wyu[l] = pv.add(p + "Wyu", {spec.ny, nu}, Constraint::Free, act);
      if (pz > 0)
        net.Wzu[l] = pv.add(p + "Wzu", {pz, nu}, Constraint::Free, act);
      if (l + 1 < L && l < static_cast<int>(spec.u_widths.size())) {
        int um = spec.u_widths[l];
        const std::string ua = activation_name(spec.u_acts[l]);
        net.uW[l] = pv.add(p + "uW", {um, nu}, Constraint::Free, ua);
        net.ub[l] = pv.add(p + "ub", {um}, Constraint::Free, ua);
        nu = um;
      }
    }
  }
  net.spec = std::move(spec);
  return net;
}

MlpNet build_mlp(ParamVector& pv, MlpSpec spec) {
  MlpNet net;
  const int L = static_cast<int>(spec.widths.size());
  if (static_cast<int>(spec.acts.size()) != L)
    throw std::invalid_argument(spec.prefix + ": one activation per layer");
  int nin = spec.in;
  for (int l = 0; l < L; ++l) {
    const std::string p = spec.prefix + ".L" + std::to_string(l) + ".";
    const std::string act = activation_name(spec.acts[l]);
    net.W.push_back(pv.add(p + "W", {spec.widths[l], nin}, Constraint::Free, act));
    net.b.push_back(pv.add(p + "b", {spec.widths[l]}, Constraint::Free, act));
    nin = spec.widths[l];
  }
  net.spec = std::move(spec);
  return net;
}

void validate_constraints(const ParamVector& pv, const TwoBranchNet& net) {
  auto check = [&](int idx) {
    if (idx < 0) return;
    for (double w : pv.array(idx))
      if (w < 0.0)
        throw std::invalid_argument(pv.meta[idx].name +
                                    ": negative entry in constrained matrix");
  };
  for (size_t l = 0; l < net.Wz.size(); ++l) {
    check(net.Wz[l]);
    check(net.Wy[l]);
  }
}

void init_params(ParamVector& pv, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < pv.meta.size(); ++i) {
    const ArrayMeta& m = pv.meta[i];
    auto arr = pv.array(static_cast<int>(i));
    if (m.shape.size() == 2) {
      double lim = std::sqrt(6.0 / (m.shape[0] + m.shape[1]));
      double lo = m.constraint == Constraint::NonNeg ? 0.0 : -lim;
      std::uniform_real_distribution<double> d(lo, lim);
      for (double& w : arr) w = d(rng);
    } else {
      std::uniform_real_distribution<double> d(-m.init_range, m.init_range);
      for (double& w : arr) w = d(rng);
    }
  }
}

void project_constraints(ParamVector& pv) {
  for (size_t i = 0; i < pv.meta.size(); ++i) {
    if (pv.meta[i].constraint != Constraint::NonNeg) continue;
    for (double& w : pv.array(static_cast<int>(i)))
      if (w < 0.0) w = 0.0;
  }
}

double min_constrained_entry(const ParamVector& pv) {
  double mn = 0.0;
  for (size_t i = 0; i < pv.meta.size(); ++i) {
    if (pv.meta[i].constraint != Constraint::NonNeg) continue;
    for (double w : pv.array(static_cast<int>(i))) mn = std::min(mn, w);
  }
  return mn;
}

}  // namespace dn
