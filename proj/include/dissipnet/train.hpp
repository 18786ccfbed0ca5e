#pragma once

#include "dissipnet/consti.hpp"
#include "dissipnet/dataset.hpp"
#include "dissipnet/parallel.hpp"

namespace dn {

struct TrainConfig {
  int epochs = 2000;
  double lr = 1e-3;
  double clip = 1e-3;         // global-norm gradient clipping threshold
  double lambda_evo = 1000.0;
  double lambda_gr = 1e-4;
  int pretrain_epochs = 500;
  int pretrain_paths = 1;
  int pretrain_steps = 40;
  uint64_t seed = 0;
  int seam = 4;
};

struct EpochStats {
  double loss_stress = 0.0;
  double loss_evo = 0.0;
  double loss_total = 0.0;
};

struct FitResult {
  NetModel model;
  std::vector<EpochStats> history;  // pretrain rows then main rows
  double best_loss = 0.0;
  bool aborted_nan = false;
};

// ---------------------------------------------------------------------------
// losses (LiNN-updated states throughout, as in training)

// squared-error sums of one path; stress errors are in normalized units
template <class S>
struct PathTerms {
  S stress;  // sum of squared normalized stress errors
  S evo;     // sum of squared implicit-residual components
  int count = 0;
};

template <class S>
PathTerms<S> path_loss_terms(const Topology& topo, const ParamsT<S>& P,
                             const std::vector<PathRecord>& path,
                             const UnitVector3& n, double sbar,
                             double lambda_gr, int max_steps, int path_id) {
  SymTensor3 M = sym(outer(n, n));
  PathTerms<S> out{S(0.0), S(0.0), 0};
  StateT<S> st;
  int steps = max_steps < 0
                  ? static_cast<int>(path.size())
                  : std::min<int>(max_steps, static_cast<int>(path.size()));
  for (int k = 0; k < steps; ++k) {
    const PathRecord& rec = path[k];
    Sym3<S> C;
    for (int j = 0; j < 6; ++j) C.a[j] = S(rec.C.a[j]);
    StateT<S> next =
        update_linn(topo, P, st, C, rec.dt, M, n, LinnScheme::Euler, lambda_gr);
    Sym3<S> Ci_prev = sym(st.Ui.full() * st.Ui.full());
    Sym3<S> Ci = sym(next.Ui.full() * next.Ui.full());
    // stress and the residual's driving force share one evaluation
    auto [Sp, Sig] = stress_and_driving(topo, P, C, Ci, next.Ui, M, lambda_gr);
    for (int j = 0; j < 6; ++j) {
      S e = Sp.a[j] - rec.S.a[j] / sbar;
      if (!isfinite_value(e))
        throw EvalError("non-finite stress prediction", path_id, k);
      out.stress += e * e;
    }
    auto [n1, n2] = pushforward_generic(next.Ui, n);
    S J = sqrt(det(C));
    Sym3<S> D = flow_rate(topo, P, Sig, n1, n2, J);
    Mat3<S> E = expm_series(((-2.0) * rec.dt) * D.full());
    Sym3<S> r = Ci_prev - sym(next.Ui.full() * E * next.Ui.full());
    for (int j = 0; j < 6; ++j) {
      if (!isfinite_value(r.a[j]))
        throw EvalError("non-finite evolution residual", path_id, k);
      out.evo += r.a[j] * r.a[j];
    }
    st = next;
    out.count += 6;
  }
  return out;
}

// mean-squared stress loss over the listed paths (normalized units)
double loss_stress(const NetModel& m, const Dataset& ds,
                   const std::vector<int>& paths, int max_steps = -1);
double loss_evo(const NetModel& m, const Dataset& ds,
                const std::vector<int>& paths, int max_steps = -1);
EpochStats loss_total(const NetModel& m, const Dataset& ds,
                      const std::vector<int>& paths, double lambda_evo,
                      int max_steps = -1);

// gradient of the total loss over the listed paths; per-path passes run on
// OpenMP workers, the reduction is ordered so results are thread-count
// independent
struct EpochGradient {
  ParamVector grad;
  EpochStats stats;
};
EpochGradient epoch_gradient(const Topology& topo, const ParamVector& theta,
                             const Dataset& ds, const std::vector<int>& paths,
                             const UnitVector3& n, double lambda_evo,
                             double lambda_gr, int max_steps, Exec exec);

// ---------------------------------------------------------------------------
// optimizer

struct AdamState {
  std::vector<double> m, v;
  int64_t step = 0;
};

// bias-corrected ADAM (beta1 = 0.9, beta2 = 0.999, eps = 1e-8)
void adam_step(ParamVector& theta, const ParamVector& grad, AdamState& st,
               double lr);

// scales g so its global norm does not exceed threshold
void clip_global_norm(ParamVector& g, double threshold);

// two-stage schedule: pretrain on one path / first steps, then full data;
// non-finite loss aborts and returns the best checkpoint
FitResult fit(const Dataset& ds, const TrainConfig& cfg,
              const std::vector<int>& train_paths, Exec exec = Exec::Parallel);

// ---------------------------------------------------------------------------
// unconstrained recurrent baselines (inputs: C and dt; hidden width 6;
// normalized stresses predicted by a linear head)

struct BaselineModel {
  enum class Kind { Rnn, Linn };
  Kind kind = Kind::Rnn;
  MlpNet core;   // rnn stack, or the LiNN source net
  MlpNet alpha;  // LiNN modulation net
  int Why = -1, by = -1;
  ParamVector params;
  double stress_scale = 1.0;
};

BaselineModel build_baseline(BaselineModel::Kind kind, uint64_t seed);

template <class S>
std::array<S, 6> baseline_step(const BaselineModel& bm, const ParamsT<S>& P,
                               std::array<S, 6>& h, const double* x7) {
  std::array<S, 13> in;
  for (int i = 0; i < 7; ++i) in[i] = S(x7[i]);
  for (int i = 0; i < 6; ++i) in[7 + i] = h[i];
  std::array<S, 6> hn;
  if (bm.kind == BaselineModel::Kind::Rnn) {
    mlp_forward(bm.core, P, in.data(), 13, hn.data());
  } else {
    std::array<S, 6> f, al;
    mlp_forward(bm.core, P, in.data(), 13, f.data());
    mlp_forward(bm.alpha, P, in.data(), 13, al.data());
    double dt = x7[6];
    for (int i = 0; i < 6; ++i)
      hn[i] = (1.0 - clamp(al[i], 0.0, 1.0)) * h[i] + dt * f[i];
  }
  h = hn;
  std::array<S, 6> y;
  auto W = P.array(bm.Why);
  auto b = P.array(bm.by);
  for (int j = 0; j < 6; ++j) {
    S acc = S(b[j]);
    for (int i = 0; i < 6; ++i) acc += W[j * 6 + i] * h[i];
    y[j] = acc;
  }
  return y;
}

FitResult fit_baseline(const Dataset& ds, const TrainConfig& cfg,
                       BaselineModel::Kind kind,
                       const std::vector<int>& train_paths,
                       BaselineModel* out_model, Exec exec = Exec::Parallel);

double baseline_loss_stress(const BaselineModel& bm, const Dataset& ds,
                            const std::vector<int>& paths);

// per-path, per-component normalized MSE report (6 components + total)
struct EvalRow {
  int path = 0;
  std::array<double, 6> mse{};
  double total = 0.0;
};
std::vector<EvalRow> eval_report(const NetModel& m, const Dataset& ds,
                                 const std::vector<int>& paths,
                                 UpdateMode mode);

}  // namespace dn
