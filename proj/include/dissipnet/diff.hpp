#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dissipnet/dual.hpp"
#include "dissipnet/fused.hpp"
#include "dissipnet/tape.hpp"
#include "dissipnet/tensor.hpp"

namespace dn {

// evaluation failure (non-finite intermediate / loss); carries the offending
// record location when known
struct EvalError : std::runtime_error {
  int path = -1;
  int step = -1;
  explicit EvalError(const std::string& msg, int p = -1, int s = -1)
      : std::runtime_error(msg), path(p), step(s) {}
};

enum class Constraint { Free, NonNeg };

struct ArrayMeta {
  std::string name;
  std::vector<int> shape;  // row-major; [rows, cols] or [n]
  Constraint constraint = Constraint::Free;
  std::string activation;   // owning layer's activation, for serialization
  double init_range = 0.1;  // half-width of the uniform init for 1-D arrays
};

// Named parameter arrays over one flat buffer. Every entry maps to exactly
// one layer slot; the flat layout is what the optimizer and the tape see.
template <class S>
struct ParamsT {
  std::vector<ArrayMeta> meta;
  std::vector<size_t> offset;
  std::vector<S> flat;

  int add(const std::string& name, std::vector<int> shape,
          Constraint c = Constraint::Free, const std::string& act = "",
          double init_range = 0.1) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    meta.push_back(ArrayMeta{name, std::move(shape), c, act, init_range});
    offset.push_back(flat.size());
    flat.resize(flat.size() + n, S(0.0));
    return static_cast<int>(meta.size()) - 1;
  }

  size_t array_size(int idx) const {
    size_t n = 1;
    for (int d : meta[idx].shape) n *= static_cast<size_t>(d);
    return n;
  }

  std::span<S> array(int idx) {
    return std::span<S>(flat.data() + offset[idx], array_size(idx));
  }
  std::span<const S> array(int idx) const {
    return std::span<const S>(flat.data() + offset[idx], array_size(idx));
  }

  int find(const std::string& name) const {
    for (size_t i = 0; i < meta.size(); ++i)
      if (meta[i].name == name) return static_cast<int>(i);
    return -1;
  }

  size_t size() const { return flat.size(); }
};

using ParamVector = ParamsT<double>;

// copy of `p` whose entries are fresh leaves on the active tape, in flat order
inline ParamsT<Var> lift(const ParamVector& p) {
  ParamsT<Var> r;
  r.meta = p.meta;
  r.offset = p.offset;
  r.flat.reserve(p.flat.size());
  for (double w : p.flat) r.flat.push_back(Var::leaf(w));
  return r;
}

// adjoints of the lifted leaves after a sweep, shaped like the source
inline ParamVector extract_grads(const Tape& tape, const ParamsT<Var>& lifted) {
  ParamVector g;
  g.meta = lifted.meta;
  g.offset = lifted.offset;
  g.flat.resize(lifted.flat.size());
  for (size_t i = 0; i < lifted.flat.size(); ++i)
    g.flat[i] = tape.adjoint(lifted.flat[i].i);
  return g;
}

// ---------------------------------------------------------------------------
// gradients of scalar fields over symmetric tensors
//
// The gradient is computed on the 6 independent components and mapped back
// with halved off-diagonal weights, so that df = result : dX holds for
// symmetric dX.

template <int K, class S>
Sym3<Dual<S, K>> promote(const Sym3<S>& x) {
  Sym3<Dual<S, K>> r;
  for (int k = 0; k < 6; ++k) r.a[k].v = x.a[k];
  return r;
}

template <int K, class S>
Sym3<Dual<S, K>> seed_tangents(const Sym3<S>& x, int first_slot) {
  Sym3<Dual<S, K>> r = promote<K>(x);
  for (int k = 0; k < 6; ++k) r.a[k].d[first_slot + k] = S(1.0);
  return r;
}

template <class S, int K>
Sym3<S> collect_sym_grad(const Dual<S, K>& f, int first_slot) {
  Sym3<S> g;
  for (int k = 0; k < 6; ++k) {
    S d = f.d[first_slot + k];
    g.a[k] = k < 3 ? d : S(0.5) * d;
  }
  return g;
}

// f: Sym3<Dual<S,6>> -> Dual<S,6>
template <class S, class F>
Sym3<S> sym_grad(F&& f, const Sym3<S>& X) {
  auto xd = seed_tangents<6>(X, 0);
  auto r = f(xd);
  return collect_sym_grad(r, 0);
}

template <class F>
SymTensor3 grad_scalar(F&& f, const SymTensor3& X) {
  SymTensor3 g = sym_grad<double>(std::forward<F>(f), X);
  for (double v : g.a)
    if (!std::isfinite(v))
      throw EvalError("grad_scalar: non-finite gradient component");
  return g;
}

// gradient of a scalar loss over every parameter entry; masks are not applied
// here (projection happens in the optimizer)
template <class L>
ParamVector grad_params(L&& loss, const ParamVector& theta) {
  Tape tape;
  TapeScope scope(tape);
  ParamsT<Var> th = lift(theta);
  Var l = loss(th);
  if (!std::isfinite(l.v)) throw EvalError("grad_params: non-finite loss");
  ParamVector g;
  g.meta = th.meta;
  g.offset = th.offset;
  if (!l.taped()) {
    g.flat.assign(th.flat.size(), 0.0);
    return g;
  }
  tape.sweep(l.i);
  return extract_grads(tape, th);
}

// max relative error between grad_scalar and central finite differences
template <class F>
double check_gradient(F&& f, const SymTensor3& X, double h) {
  SymTensor3 g = grad_scalar(f, X);
  auto feval = [&](const SymTensor3& Y) {
    auto yd = promote<6>(Y);
    return value_of(f(yd));
  };
  double err = 0.0;
  for (int k = 0; k < 6; ++k) {
    SymTensor3 Xp = X, Xm = X;
    Xp.a[k] += h;
    Xm.a[k] -= h;
    double fd = (feval(Xp) - feval(Xm)) / (2.0 * h);
    double ad = k < 3 ? g.a[k] : 2.0 * g.a[k];
    double denom = std::max({1.0, std::abs(fd), std::abs(ad)});
    err = std::max(err, std::abs(ad - fd) / denom);
  }
  return err;
}

}  // namespace dn
