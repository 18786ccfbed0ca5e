#include "dissipnet/refmodel.hpp"

#include <random>

#include "dissipnet/parallel.hpp"

namespace dn {

Tensor3 metric_tensor(const UnitVector3& n, double beta) {
  if (beta <= 0.0) throw std::domain_error("metric_tensor: beta must be > 0");
  Tensor3 R = rodrigues(n);
  Tensor3 G0 = Tensor3::diag(beta * beta, 1.0 / beta, 1.0 / beta);
  return R * G0 * transpose(R);
}

SymTensor3 ref_flow(const SymTensor3& Sig, const Tensor3& M3,
                    const RefParams& rp, bool iso_only) {
  Tensor3 S = Sig.full();
  double trS = trace(S);
  SymTensor3 d = dev(Sig);
  SymTensor3 r = SymTensor3::zero();
  double ci = (1.0 / rp.tau) * (1.0 / 9.0) * trS / rp.c_neq;
  r.a[0] = ci;
  r.a[1] = ci;
  r.a[2] = ci;
  r = r + ((1.0 / rp.tau) * 2.0 / (rp.a_neq + rp.b_neq)) * d;
  if (iso_only) return r;
  SymTensor3 sm = sym(M3);
  double trSM = trace(S * M3);
  Tensor3 mix = S * sm.full() + sm.full() * S;
  double c = 1.0 / (2.0 * rp.eta_neq * rp.tau);
  r = r + c * (2.0 * trSM) * sm + c * sym(mix);
  return r;
}

SymTensor3 RefModel::stress(const SymTensor3& C, const SymTensor3& Ci) const {
  auto Cd = seed_tangents<6>(C, 0);
  auto Cid = promote<6>(Ci);
  auto psi = ref_psi(Cd, Cid, p, G, iso_only);
  return 2.0 * collect_sym_grad(psi, 0);
}

SymTensor3 RefModel::sigbar(const SymTensor3& C, const SymTensor3& Ci,
                            const SymTensor3& Ui) const {
  auto Cd = promote<6>(C);
  auto Cid = seed_tangents<6>(Ci, 0);
  auto psi = ref_psi(Cd, Cid, p, G, iso_only);
  SymTensor3 g = collect_sym_grad(psi, 0);
  return (-2.0) * sym(Ui.full() * g.full() * Ui.full());
}

SymTensor3 RefModel::flow(const SymTensor3& C, const SymTensor3& Ci,
                          const SymTensor3& Ui) const {
  SymTensor3 Sig = sigbar(C, Ci, Ui);
  SymTensor3 M = sym(outer(n, n));
  Tensor3 M3 = Ui.full() * M.full() * inverse(Ui.full());
  return ref_flow(Sig, M3, p, iso_only);
}

PointHooks RefModel::hooks() const {
  PointHooks h;
  h.stress = [this](const SymTensor3& C, const SymTensor3& Ci) {
    return stress(C, Ci);
  };
  h.flow = [this](const SymTensor3& C, const SymTensor3& Ci,
                  const SymTensor3& Ui) { return flow(C, Ci, Ui); };
  return h;
}

std::pair<MaterialState, SymTensor3> ref_step(const RefModel& m,
                                              const MaterialState& st,
                                              const StepInput& in) {
  SymTensor3 Ci = sym(st.Ui.full() * st.Ui.full());
  SymTensor3 D = m.flow(in.C_prev, Ci, st.Ui);
  Mat3<double> E = expm_sym((2.0 * in.dt) * D).full();
  SymTensor3 Ci_next = sym(st.Ui.full() * E * st.Ui.full());
  MaterialState out = st;
  out.Ui = sqrt_spd(Ci_next);
  out.t = st.t + in.dt;
  return {out, m.stress(in.C_next, Ci_next)};
}

namespace {

Tensor3 program_velocity(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> mode(0, 3);
  Tensor3 L = Tensor3::zero();
  switch (mode(rng)) {
    case 0:  // uniaxial with lateral contraction
      L = Tensor3::diag(1.0, -0.3, -0.3);
      break;
    case 1:  // near-equibiaxial
      L = Tensor3::diag(0.7, 0.7, -0.4);
      break;
    case 2:  // simple shear
      L(0, 1) = 1.0;
      break;
    default: {  // mixed
      std::normal_distribution<double> nd(0.0, 1.0);
      for (int i = 0; i < 9; ++i) L.a[i] = nd(rng);
      double nrm = norm(L);
      L = (1.0 / nrm) * L;
      break;
    }
  }
  return L;
}

}  // namespace

std::vector<SymTensor3> generate_path(const PathSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<SymTensor3> out;
  out.reserve(spec.steps);
  if (spec.kind == PathSpec::Kind::Program) {
    // three load/unload ramps with holds, scaled random amplitude
    static const double knots[] = {0.0, 0.15, 0.25, 0.45, 0.55, 0.8, 1.0};
    static const double vals[] = {0.0, 1.0, 1.0, -0.6, -0.6, 0.9, 0.0};
    Tensor3 L = program_velocity(rng);
    std::uniform_real_distribution<double> ad(0.15, 0.3);
    double amp = ad(rng);
    for (int retry = 0; retry < 20; ++retry) {
      bool ok = true;
      for (double s : vals)
        if (det(Tensor3::identity() + (s * amp) * L) < 0.2) ok = false;
      if (ok) break;
      amp *= 0.8;
    }
    for (int k = 1; k <= spec.steps; ++k) {
      double x = static_cast<double>(k) / spec.steps;
      double s = 0.0;
      for (int j = 0; j < 6; ++j) {
        if (x <= knots[j + 1]) {
          double w = (x - knots[j]) / (knots[j + 1] - knots[j]);
          s = vals[j] + w * (vals[j + 1] - vals[j]);
          break;
        }
      }
      Tensor3 F = Tensor3::identity() + (s * amp) * L;
      out.push_back(sym(transpose(F) * F));
    }
  } else {
    // smooth random walk F' = (I + dt L) F with |L| <= 0.5 and det guard
    std::normal_distribution<double> nd(0.0, 0.25);
    Tensor3 F = Tensor3::identity();
    Tensor3 L;
    for (int i = 0; i < 9; ++i) L.a[i] = nd(rng);
    for (int k = 0; k < spec.steps; ++k) {
      Tensor3 dL;
      for (int i = 0; i < 9; ++i) dL.a[i] = nd(rng);
      L = 0.9 * L + 0.45 * dL;
      double nrm = norm(L);
      if (nrm > 0.5) L = (0.5 / nrm) * L;
      Tensor3 Fn = (Tensor3::identity() + spec.dt * L) * F;
      if (det(Fn) >= 0.2) F = Fn;
      out.push_back(sym(transpose(F) * F));
    }
  }
  return out;
}

Dataset generate_dataset(int n_paths, int steps, double dt, bool iso_only,
                         const UnitVector3& n, uint64_t seed) {
  Dataset ds;
  ds.n = n;
  ds.model = iso_only ? "iso" : "aniso";
  ds.dt = dt;
  ds.seed = seed;
  ds.paths.resize(n_paths);
  RefModel ref = RefModel::make(RefParams{}, n, iso_only);

  parallel_for(n_paths, Exec::Parallel, [&](int p) {
    PathSpec spec;
    spec.kind = (p % 2 == 0) ? PathSpec::Kind::Program
                             : PathSpec::Kind::RandomWalk;
    spec.steps = steps;
    spec.dt = dt;
    // decorrelated, reproducible per (seed, path index)
    spec.seed = seed * 0x9E3779B97F4A7C15ull + 0x100000001B3ull * (p + 1);
    std::vector<SymTensor3> Cs = generate_path(spec);
    auto& recs = ds.paths[p];
    recs.resize(steps);
    MaterialState st;
    for (int k = 0; k < steps; ++k) {
      if (det(Cs[k]) <= 0.0)
        throw EvalError("generate_dataset: inadmissible deformation at path " +
                            std::to_string(p) + " step " + std::to_string(k),
                        p, k);
      StepInput in;
      in.C_next = Cs[k];
      in.C_prev = k ? Cs[k - 1] : SymTensor3::identity();
      in.dt = dt;
      auto [next, S] = ref_step(ref, st, in);
      st = next;
      recs[k] = PathRecord{(k + 1) * dt, dt, Cs[k], S};
    }
  });

  double sbar = 0.0;
  for (const auto& path : ds.paths)
    for (const auto& r : path)
      for (double s : r.S.a) sbar = std::max(sbar, std::abs(s));
  ds.stress_scale = sbar > 0.0 ? sbar : 1.0;
  return ds;
}

}  // namespace dn
