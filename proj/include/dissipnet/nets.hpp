#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "dissipnet/diff.hpp"

namespace dn {

enum class Activation { Exp, Softplus, Relu, Tanh, Gelu, Linear };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& s);

// Shifted activations: act(t) - act(b) so the layer is zero when its gated
// input vanishes. ReLU shifts the pre-activation instead ([t - b]_+), which
// keeps the output non-negative as well.
template <class S>
S shifted_act(Activation a, const S& t, const S& b) {
  switch (a) {
    case Activation::Exp:
      return exp(t) - exp(b);
    case Activation::Softplus:
      return softplus(t) - softplus(b);
    case Activation::Relu:
      return relu(t - b);
    case Activation::Tanh:
      return tanh(t) - tanh(b);
    case Activation::Gelu:
      return gelu(t) - gelu(b);
    case Activation::Linear:
      return t - b;
  }
  return S(0.0);
}

template <class S>
S plain_act(Activation a, const S& t) {
  switch (a) {
    case Activation::Exp:
      return exp(t);
    case Activation::Softplus:
      return softplus(t);
    case Activation::Relu:
      return relu(t);
    case Activation::Tanh:
      return tanh(t);
    case Activation::Gelu:
      return gelu(t);
    case Activation::Linear:
      return t;
  }
  return S(0.0);
}

// ---------------------------------------------------------------------------
// generic matvec; tape-fused specializations keep the training graph small

inline constexpr int kMaxWidth = 80;

template <class S>
S dotn(const S* x, const S* y, int n) {
  S r(0.0);
  for (int i = 0; i < n; ++i) r += x[i] * y[i];
  return r;
}

inline Var dotn(const Var* x, const Var* y, int n) { return dot(x, y, n); }

// out[j] = dot(W row j, y); weights carry no forward tangents
template <class PS, class S>
void matvec(std::span<const PS> W, int m, int n, const S* y, S* out) {
  static_assert(std::is_same_v<PS, S>);
  for (int j = 0; j < m; ++j) out[j] = dotn(W.data() + j * n, y, n);
}

template <int K>
void matvec(std::span<const Var> W, int m, int n, const Dual<Var, K>* y,
            Dual<Var, K>* out) {
  Var yv[kMaxWidth], yd[K][kMaxWidth];
  for (int i = 0; i < n; ++i) {
    yv[i] = y[i].v;
    for (int k = 0; k < K; ++k) yd[k][i] = y[i].d[k];
  }
  for (int j = 0; j < m; ++j) {
    const Var* row = W.data() + j * n;
    out[j].v = dot(row, yv, n);
    for (int k = 0; k < K; ++k) out[j].d[k] = dot(row, yd[k], n);
  }
}

template <int K>
void matvec(std::span<const double> W, int m, int n, const Dual<double, K>* y,
            Dual<double, K>* out) {
  for (int j = 0; j < m; ++j) {
    const double* row = W.data() + j * n;
    Dual<double, K> acc(0.0);
    for (int i = 0; i < n; ++i) {
      acc.v += row[i] * y[i].v;
      for (int k = 0; k < K; ++k) acc.d[k] += row[i] * y[i].d[k];
    }
    out[j] = acc;
  }
}

// ---------------------------------------------------------------------------
// two-branch constrained architecture (shared by ICNN and IMNN)
//
//   u_{l+1} = act_u(W' u_l + b'),            u_0 = x (branch absent if nx = 0)
//   z_{l+1} = act(Wz (z_l . [gz + Wzu u]_+) + Wy (y . [gy + Wyu u]_+) + bc),
//   bc      = b + Wu u
//
// Wz and Wy are entrywise non-negative. With convex non-decreasing
// activations this is the adapted ICNN (convex in y); with monotonically
// increasing activations it is the IMNN (non-decreasing in y).

struct TwoBranchSpec {
  int nx = 0;
  int ny = 0;
  std::vector<int> widths;       // z widths including the output layer
  std::vector<Activation> acts;  // one per layer
  std::vector<int> u_widths;     // u-branch widths (layers-1 entries)
  std::vector<Activation> u_acts;
  std::string prefix;
};

struct TwoBranchNet {
  TwoBranchSpec spec;
  std::vector<int> Wz, Wy, gy, gz, b;     // array indices per layer
  std::vector<int> Wzu, Wyu, Wu, uW, ub;  // u-branch (empty if nx = 0)
};

TwoBranchNet build_two_branch(ParamVector& pv, TwoBranchSpec spec);

struct MlpSpec {
  int in = 0;
  std::vector<int> widths;
  std::vector<Activation> acts;
  bool centered = true;  // shifted activations
  std::string prefix;
};

struct MlpNet {
  MlpSpec spec;
  std::vector<int> W, b;
};

MlpNet build_mlp(ParamVector& pv, MlpSpec spec);

template <class S>
struct TwoBranchOut {
  std::vector<S> u_last;  // u_{C-1}, the composition tap
  std::vector<S> z;
};

template <class S, class PS>
TwoBranchOut<S> two_branch_forward(const TwoBranchNet& net,
                                   const ParamsT<PS>& P, std::span<const S> x,
                                   std::span<const S> y) {
  const auto& sp = net.spec;
  const int L = static_cast<int>(sp.widths.size());
  if (static_cast<int>(x.size()) != sp.nx ||
      static_cast<int>(y.size()) != sp.ny)
    throw std::invalid_argument(sp.prefix + ": input width mismatch");

  std::vector<S> u(x.begin(), x.end());
  std::vector<S> z, znext, yg, t, bc, g, tmp;
  for (int l = 0; l < L; ++l) {
    const int m = sp.widths[l];
    const int p = l ? sp.widths[l - 1] : 0;
    const int nu = static_cast<int>(u.size());
    // bias path bc = b + Wu u
    auto barr = P.array(net.b[l]);
    bc.resize(m);
    for (int j = 0; j < m; ++j) bc[j] = S(barr[j]);
    if (nu > 0) {
      tmp.resize(m);
      matvec(P.array(net.Wu[l]), m, nu, u.data(), tmp.data());
      for (int j = 0; j < m; ++j) bc[j] = bc[j] + tmp[j];
    }
    // gated input: y . [gy + Wyu u]_+
    auto gyb = P.array(net.gy[l]);
    g.resize(sp.ny);
    for (int k = 0; k < sp.ny; ++k) g[k] = S(gyb[k]);
    if (nu > 0) {
      tmp.resize(sp.ny);
      matvec(P.array(net.Wyu[l]), sp.ny, nu, u.data(), tmp.data());
      for (int k = 0; k < sp.ny; ++k) g[k] = g[k] + tmp[k];
    }
    yg.resize(sp.ny);
    for (int k = 0; k < sp.ny; ++k) yg[k] = y[k] * relu(g[k]);
    t.resize(m);
    matvec(P.array(net.Wy[l]), m, sp.ny, yg.data(), t.data());
    if (p > 0) {
      auto gzb = P.array(net.gz[l]);
      g.resize(p);
      for (int k = 0; k < p; ++k) g[k] = S(gzb[k]);
      if (nu > 0) {
        tmp.resize(p);
        matvec(P.array(net.Wzu[l]), p, nu, u.data(), tmp.data());
        for (int k = 0; k < p; ++k) g[k] = g[k] + tmp[k];
      }
      std::vector<S> zg(p);
      for (int k = 0; k < p; ++k) zg[k] = z[k] * relu(g[k]);
      tmp.resize(m);
      matvec(P.array(net.Wz[l]), m, p, zg.data(), tmp.data());
      for (int j = 0; j < m; ++j) t[j] = t[j] + tmp[j];
    }
    znext.resize(m);
    for (int j = 0; j < m; ++j)
      znext[j] = shifted_act(sp.acts[l], t[j] + bc[j], bc[j]);
    z.swap(znext);
    if (nu > 0 && l + 1 < L && l < static_cast<int>(sp.u_widths.size())) {
      int um = sp.u_widths[l];
      std::vector<S> un(um);
      matvec(P.array(net.uW[l]), um, nu, u.data(), un.data());
      auto ubarr = P.array(net.ub[l]);
      for (int j = 0; j < um; ++j)
        un[j] = shifted_act(sp.u_acts[l], un[j] + S(ubarr[j]), S(ubarr[j]));
      u.swap(un);
    }
  }
  TwoBranchOut<S> out;
  out.u_last = std::move(u);
  out.z = std::move(z);
  return out;
}

// ICNN and IMNN share the machinery; both enforce non-negative Wz/Wy
// (validated on the double-facing surface).
void validate_constraints(const ParamVector& pv, const TwoBranchNet& net);

template <class S, class PS>
TwoBranchOut<S> icnn_forward(const TwoBranchNet& net, const ParamsT<PS>& P,
                             std::span<const S> x, std::span<const S> y) {
  return two_branch_forward(net, P, x, y);
}

template <class S, class PS>
std::vector<S> imnn_forward(const TwoBranchNet& net, const ParamsT<PS>& P,
                            std::span<const S> v, std::span<const S> s) {
  return two_branch_forward(net, P, v, s).z;
}

// N∘(x, y) = N_m(u_{C-1}, z_C)
template <class S, class PS>
S compose_forward(const TwoBranchNet& icnn, const TwoBranchNet& imnn,
                  const ParamsT<PS>& P, std::span<const S> x,
                  std::span<const S> y) {
  if (imnn.spec.ny != icnn.spec.widths.back())
    throw std::invalid_argument("compose_forward: seam width mismatch");
  auto c = icnn_forward(icnn, P, x, y);
  auto m = imnn_forward(imnn, P, std::span<const S>(c.u_last),
                        std::span<const S>(c.z));
  return m[0];
}

template <class S, class PS>
void mlp_forward(const MlpNet& net, const ParamsT<PS>& P, const S* x, int nin,
                 S* out) {
  const auto& sp = net.spec;
  if (nin != sp.in) throw std::invalid_argument(sp.prefix + ": width mismatch");
  std::vector<S> h(x, x + nin), hn;
  for (size_t l = 0; l < sp.widths.size(); ++l) {
    int m = sp.widths[l];
    hn.resize(m);
    matvec(P.array(net.W[l]), m, static_cast<int>(h.size()), h.data(),
           hn.data());
    auto b = P.array(net.b[l]);
    for (int j = 0; j < m; ++j) {
      if (sp.centered)
        hn[j] = shifted_act(sp.acts[l], hn[j] + S(b[j]), S(b[j]));
      else
        hn[j] = plain_act(sp.acts[l], hn[j] + S(b[j]));
    }
    h.swap(hn);
  }
  for (size_t j = 0; j < h.size(); ++j) out[j] = h[j];
}

// scalar-output evaluation with a hand-written backward pass: returns the
// value and d(out)/dy as tape expressions. One forward plus one transposed
// sweep replaces a K-wide forward-tangent pass through the network (the
// training graph shrinks accordingly). Empty pass-through branch only.
template <class PS>
struct ScalarNetGrad {
  PS value;
  std::vector<PS> dy;
};

namespace detail {

template <class PS>
PS act_deriv(Activation a, const PS& s, const PS& b) {
  switch (a) {
    case Activation::Exp:
      return exp(s);
    case Activation::Softplus:
      return 1.0 / (1.0 + exp(-s));
    case Activation::Relu:
      return value_of(s) > value_of(b) ? PS(1.0) : PS(0.0);
    case Activation::Tanh: {
      PS v = tanh(s);
      return 1.0 - v * v;
    }
    case Activation::Gelu: {
      PS phi = 0.5 * (1.0 + erf(s * 0.7071067811865476));
      PS dens = 0.3989422804014327 * exp(-0.5 * (s * s));
      return phi + s * dens;
    }
    case Activation::Linear:
      return PS(1.0);
  }
  return PS(0.0);
}

// forward pass storing pre-activations and gates; backward accumulates dy
template <class PS>
struct TwoBranchTrace {
  std::vector<std::vector<PS>> pre;    // s_l (with bias)
  std::vector<std::vector<PS>> gy;     // [gy]_+ per layer
  std::vector<std::vector<PS>> gz;     // [gz]_+ per layer (l > 0)
  std::vector<std::vector<PS>> z;      // layer outputs
};

template <class PS>
void two_branch_record(const TwoBranchNet& net, const ParamsT<PS>& P,
                       std::span<const PS> y, TwoBranchTrace<PS>& tr) {
  const auto& sp = net.spec;
  const int L = static_cast<int>(sp.widths.size());
  tr.pre.assign(L, {});
  tr.gy.assign(L, {});
  tr.gz.assign(L, {});
  tr.z.assign(L, {});
  std::vector<PS> yg(sp.ny), t;
  for (int l = 0; l < L; ++l) {
    const int m = sp.widths[l];
    const int p = l ? sp.widths[l - 1] : 0;
    auto gyb = P.array(net.gy[l]);
    tr.gy[l].resize(sp.ny);
    for (int k = 0; k < sp.ny; ++k) {
      tr.gy[l][k] = relu(gyb[k]);
      yg[k] = y[k] * tr.gy[l][k];
    }
    t.resize(m);
    matvec(P.array(net.Wy[l]), m, sp.ny, yg.data(), t.data());
    if (p > 0) {
      auto gzb = P.array(net.gz[l]);
      tr.gz[l].resize(p);
      std::vector<PS> zg(p);
      for (int k = 0; k < p; ++k) {
        tr.gz[l][k] = relu(gzb[k]);
        zg[k] = tr.z[l - 1][k] * tr.gz[l][k];
      }
      std::vector<PS> wz(m);
      matvec(P.array(net.Wz[l]), m, p, zg.data(), wz.data());
      for (int j = 0; j < m; ++j) t[j] = t[j] + wz[j];
    }
    auto b = P.array(net.b[l]);
    tr.pre[l].resize(m);
    tr.z[l].resize(m);
    for (int j = 0; j < m; ++j) {
      tr.pre[l][j] = t[j] + b[j];
      tr.z[l][j] = shifted_act(sp.acts[l], tr.pre[l][j], PS(b[j]));
    }
  }
}

// backward from seeds on the last layer; adds W^T delta contributions to dy
template <class PS>
void two_branch_backward(const TwoBranchNet& net, const ParamsT<PS>& P,
                         std::span<const PS> y, const TwoBranchTrace<PS>& tr,
                         std::vector<PS> dz, std::vector<PS>& dy) {
  const auto& sp = net.spec;
  const int L = static_cast<int>(sp.widths.size());
  (void)y;
  for (int l = L - 1; l >= 0; --l) {
    const int m = sp.widths[l];
    const int p = l ? sp.widths[l - 1] : 0;
    auto b = P.array(net.b[l]);
    std::vector<PS> ds(m);
    for (int j = 0; j < m; ++j)
      ds[j] = dz[j] * act_deriv(sp.acts[l], tr.pre[l][j], PS(b[j]));
    // dy += gy . Wy^T ds
    auto Wy = P.array(net.Wy[l]);
    for (int k = 0; k < sp.ny; ++k) {
      PS col[kMaxWidth];
      for (int j = 0; j < m; ++j) col[j] = Wy[j * sp.ny + k];
      dy[k] = dy[k] + tr.gy[l][k] * dotn(col, ds.data(), m);
    }
    if (p > 0) {
      auto Wz = P.array(net.Wz[l]);
      dz.assign(p, PS(0.0));
      for (int k = 0; k < p; ++k) {
        PS col[kMaxWidth];
        for (int j = 0; j < m; ++j) col[j] = Wz[j * p + k];
        dz[k] = tr.gz[l][k] * dotn(col, ds.data(), m);
      }
    }
  }
}

}  // namespace detail

// value and input-gradient of a scalar-output two-branch net (empty x)
template <class PS>
ScalarNetGrad<PS> two_branch_scalar_vjp(const TwoBranchNet& net,
                                        const ParamsT<PS>& P,
                                        std::span<const PS> y) {
  detail::TwoBranchTrace<PS> tr;
  detail::two_branch_record(net, P, y, tr);
  ScalarNetGrad<PS> out;
  out.value = tr.z.back()[0];
  out.dy.assign(net.spec.ny, PS(0.0));
  std::vector<PS> seed(net.spec.widths.back(), PS(0.0));
  seed[0] = PS(1.0);
  detail::two_branch_backward(net, P, y, tr, std::move(seed), out.dy);
  return out;
}

// value and input-gradient of the ICNN-IMNN composition (empty x)
template <class PS>
ScalarNetGrad<PS> compose_scalar_vjp(const TwoBranchNet& icnn,
                                     const TwoBranchNet& imnn,
                                     const ParamsT<PS>& P,
                                     std::span<const PS> y) {
  detail::TwoBranchTrace<PS> trc;
  detail::two_branch_record(icnn, P, y, trc);
  std::span<const PS> s(trc.z.back());
  detail::TwoBranchTrace<PS> trm;
  detail::two_branch_record(imnn, P, s, trm);

  ScalarNetGrad<PS> out;
  out.value = trm.z.back()[0];
  // d(out)/ds through the IMNN
  std::vector<PS> dseam(imnn.spec.ny, PS(0.0));
  std::vector<PS> seed(imnn.spec.widths.back(), PS(0.0));
  seed[0] = PS(1.0);
  detail::two_branch_backward(imnn, P, s, trm, std::move(seed), dseam);
  // continue through the ICNN
  out.dy.assign(icnn.spec.ny, PS(0.0));
  detail::two_branch_backward(icnn, P, y, trc, std::move(dseam), out.dy);
  return out;
}

// ---------------------------------------------------------------------------
// liquid cell

enum class LinnScheme { Euler, Exponential };

// h' = (1 - dt a) . h + dt f                               (Euler)
// h' = exp(-dt a) . h + dt xi(-dt a) . f, xi(x) = (e^x-1)/x (Exponential)
template <class S>
std::array<S, 6> linn_step_update(const std::array<S, 6>& h,
                                  const std::array<S, 6>& alpha,
                                  const std::array<S, 6>& f, double dt,
                                  LinnScheme scheme) {
  std::array<S, 6> r;
  if (scheme == LinnScheme::Euler) {
    for (int i = 0; i < 6; ++i)
      r[i] = (1.0 - dt * alpha[i]) * h[i] + dt * f[i];
  } else {
    for (int i = 0; i < 6; ++i) {
      S x = (-dt) * alpha[i];
      S xi = std::abs(value_of(x)) < 1e-4
                 ? 1.0 + 0.5 * x + (1.0 / 6.0) * (x * x)
                 : (exp(x) - 1.0) / x;
      r[i] = exp(x) * h[i] + (dt * xi) * f[i];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// initialization / constraint projection

void init_params(ParamVector& pv, uint64_t seed);
void project_constraints(ParamVector& pv);
double min_constrained_entry(const ParamVector& pv);

}  // namespace dn
