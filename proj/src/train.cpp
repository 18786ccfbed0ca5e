#include "dissipnet/train.hpp"

#include <cmath>
#include <limits>

namespace dn {

namespace {

std::vector<int> all_paths(const Dataset& ds) {
  std::vector<int> ids(ds.paths.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

int count_records(const Dataset& ds, const std::vector<int>& paths,
                  int max_steps) {
  int n = 0;
  for (int p : paths) {
    int len = static_cast<int>(ds.paths[p].size());
    n += max_steps < 0 ? len : std::min(max_steps, len);
  }
  return n;
}

}  // namespace

double loss_stress(const NetModel& m, const Dataset& ds,
                   const std::vector<int>& paths, int max_steps) {
  double sum = 0.0;
  for (int p : paths) {
    auto t = path_loss_terms<double>(m.topo, m.params, ds.paths[p], m.n,
                                     ds.stress_scale, m.lambda_gr, max_steps, p);
    sum += t.stress;
  }
  return sum / (6.0 * count_records(ds, paths, max_steps));
}

double loss_evo(const NetModel& m, const Dataset& ds,
                const std::vector<int>& paths, int max_steps) {
  double sum = 0.0;
  for (int p : paths) {
    auto t = path_loss_terms<double>(m.topo, m.params, ds.paths[p], m.n,
                                     ds.stress_scale, m.lambda_gr, max_steps, p);
    sum += t.evo;
  }
  return sum / (6.0 * count_records(ds, paths, max_steps));
}

EpochStats loss_total(const NetModel& m, const Dataset& ds,
                      const std::vector<int>& paths, double lambda_evo,
                      int max_steps) {
  double ss = 0.0, se = 0.0;
  for (int p : paths) {
    auto t = path_loss_terms<double>(m.topo, m.params, ds.paths[p], m.n,
                                     ds.stress_scale, m.lambda_gr, max_steps, p);
    ss += t.stress;
    se += t.evo;
  }
  double n = 6.0 * count_records(ds, paths, max_steps);
  EpochStats st;
  st.loss_stress = ss / n;
  st.loss_evo = se / n;
  st.loss_total = st.loss_stress + lambda_evo * st.loss_evo;
  return st;
}

EpochGradient epoch_gradient(const Topology& topo, const ParamVector& theta,
                             const Dataset& ds, const std::vector<int>& paths,
                             const UnitVector3& n, double lambda_evo,
                             double lambda_gr, int max_steps, Exec exec) {
  const int np = static_cast<int>(paths.size());
  const double denom = 6.0 * count_records(ds, paths, max_steps);
  std::vector<std::vector<double>> grads(np);
  std::vector<double> ls(np), le(np);
  std::vector<std::exception_ptr> errs(np);

  parallel_for(np, exec, [&](int i) {
    try {
      Tape& tape = scratch_tape();
      TapeScope scope(tape);
      ParamsT<Var> lifted = lift(theta);
      auto t = path_loss_terms<Var>(topo, lifted, ds.paths[paths[i]], n,
                                    ds.stress_scale, lambda_gr, max_steps,
                                    paths[i]);
      Var L = t.stress + lambda_evo * t.evo;
      ls[i] = t.stress.v;
      le[i] = t.evo.v;
      if (!std::isfinite(L.v))
        throw EvalError("non-finite path loss", paths[i], -1);
      grads[i].assign(theta.flat.size(), 0.0);
      if (L.taped()) {
        tape.sweep(L.i);
        for (size_t k = 0; k < lifted.flat.size(); ++k)
          grads[i][k] = tape.adjoint(lifted.flat[k].i);
      }
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });
  for (int i = 0; i < np; ++i)
    if (errs[i]) std::rethrow_exception(errs[i]);

  EpochGradient out;
  out.grad.meta = theta.meta;
  out.grad.offset = theta.offset;
  out.grad.flat.assign(theta.flat.size(), 0.0);
  double ssum = 0.0, esum = 0.0;
  for (int i = 0; i < np; ++i) {  // fixed order: thread-count independent
    for (size_t k = 0; k < out.grad.flat.size(); ++k)
      out.grad.flat[k] += grads[i][k];
    ssum += ls[i];
    esum += le[i];
  }
  for (double& g : out.grad.flat) g /= denom;
  out.stats.loss_stress = ssum / denom;
  out.stats.loss_evo = esum / denom;
  out.stats.loss_total =
      out.stats.loss_stress + lambda_evo * out.stats.loss_evo;
  return out;
}

void clip_global_norm(ParamVector& g, double threshold) {
  double n2 = 0.0;
  for (double x : g.flat) n2 += x * x;
  double nrm = std::sqrt(n2);
  if (nrm <= threshold || nrm == 0.0) return;
  double s = threshold / nrm;
  for (double& x : g.flat) x *= s;
}

void adam_step(ParamVector& theta, const ParamVector& grad, AdamState& st,
               double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (st.m.size() != theta.flat.size()) {
    st.m.assign(theta.flat.size(), 0.0);
    st.v.assign(theta.flat.size(), 0.0);
    st.step = 0;
  }
  ++st.step;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (size_t k = 0; k < theta.flat.size(); ++k) {
    double g = grad.flat[k];
    st.m[k] = b1 * st.m[k] + (1.0 - b1) * g;
    st.v[k] = b2 * st.v[k] + (1.0 - b2) * g * g;
    theta.flat[k] -= lr * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + eps);
  }
}

namespace {

struct Stage {
  std::vector<int> paths;
  int max_steps;
  int epochs;
};

bool run_stage(const Stage& stage, const Dataset& ds, const TrainConfig& cfg,
               const UnitVector3& n, const Topology& topo, ParamVector& theta,
               AdamState& adam, std::vector<EpochStats>& history,
               ParamVector& best, double& best_loss, Exec exec) {
  for (int e = 0; e < stage.epochs; ++e) {
    EpochGradient eg;
    try {
      eg = epoch_gradient(topo, theta, ds, stage.paths, n, cfg.lambda_evo,
                          cfg.lambda_gr, stage.max_steps, exec);
    } catch (const EvalError&) {
      return false;  // abort with the last finite checkpoint
    }
    history.push_back(eg.stats);
    if (!std::isfinite(eg.stats.loss_total)) return false;
    if (eg.stats.loss_total < best_loss) {
      best_loss = eg.stats.loss_total;
      best = theta;
    }
    clip_global_norm(eg.grad, cfg.clip);
    adam_step(theta, eg.grad, adam, cfg.lr);
    project_constraints(theta);
  }
  return true;
}

}  // namespace

FitResult fit(const Dataset& ds, const TrainConfig& cfg,
              const std::vector<int>& train_paths, Exec exec) {
  FitResult out;
  ParamVector theta;
  Topology topo = build_default_topology(theta, cfg.seam);
  init_params(theta, cfg.seed);
  project_constraints(theta);

  std::vector<int> paths = train_paths.empty() ? all_paths(ds) : train_paths;
  AdamState adam;
  ParamVector best = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  bool ok = true;

  if (cfg.pretrain_epochs > 0) {
    Stage pre;
    pre.paths.assign(
        paths.begin(),
        paths.begin() + std::min<size_t>(cfg.pretrain_paths, paths.size()));
    pre.max_steps = cfg.pretrain_steps;
    pre.epochs = cfg.pretrain_epochs;
    // pretraining losses are on a subset and not comparable with full-data
    // losses, so the stage keeps its own checkpoint
    AdamState pre_adam;
    ParamVector pre_best = theta;
    double pre_best_loss = std::numeric_limits<double>::infinity();
    ok = run_stage(pre, ds, cfg, ds.n, topo, theta, pre_adam, out.history,
                   pre_best, pre_best_loss, exec);
    if (std::isfinite(pre_best_loss)) theta = pre_best;
  }
  if (ok)
    ok = run_stage(Stage{paths, -1, cfg.epochs}, ds, cfg, ds.n, topo, theta,
                   adam, out.history, best, best_loss, exec);
  out.aborted_nan = !ok;

  out.model.params = std::isfinite(best_loss) ? best : theta;
  out.best_loss = std::isfinite(best_loss) ? best_loss : 0.0;
  out.model.topo = topo;
  out.model.n = ds.n;
  out.model.lambda_gr = cfg.lambda_gr;
  out.model.stress_scale = ds.stress_scale;
  return out;
}

// ---------------------------------------------------------------------------
// baselines

BaselineModel build_baseline(BaselineModel::Kind kind, uint64_t seed) {
  BaselineModel bm;
  bm.kind = kind;
  if (kind == BaselineModel::Kind::Rnn) {
    bm.core = build_mlp(
        bm.params,
        MlpSpec{13,
                {64, 64, 64, 64, 64, 6},
                {Activation::Gelu, Activation::Gelu, Activation::Gelu,
                 Activation::Gelu, Activation::Gelu, Activation::Linear},
                false,
                "rnn"});
  } else {
    bm.core = build_mlp(
        bm.params,
        MlpSpec{13,
                {64, 64, 64, 64, 6},
                {Activation::Gelu, Activation::Gelu, Activation::Gelu,
                 Activation::Gelu, Activation::Linear},
                true,
                "linn_f"});
    bm.alpha = build_mlp(
        bm.params,
        MlpSpec{13,
                {64, 64, 64, 64, 6},
                {Activation::Gelu, Activation::Gelu, Activation::Gelu,
                 Activation::Gelu, Activation::Relu},
                true,
                "linn_a"});
  }
  bm.Why = bm.params.add("head.Why", {6, 6});
  bm.by = bm.params.add("head.by", {6});
  init_params(bm.params, seed);
  return bm;
}

namespace {

template <class S>
S baseline_path_sumsq(const BaselineModel& bm, const ParamsT<S>& P,
                      const std::vector<PathRecord>& path, double sbar,
                      int max_steps, int path_id) {
  std::array<S, 6> h{};
  S sum(0.0);
  int steps = max_steps < 0
                  ? static_cast<int>(path.size())
                  : std::min<int>(max_steps, static_cast<int>(path.size()));
  for (int k = 0; k < steps; ++k) {
    double x7[7];
    for (int j = 0; j < 6; ++j) x7[j] = path[k].C.a[j];
    x7[6] = path[k].dt;
    std::array<S, 6> y = baseline_step(bm, P, h, x7);
    for (int j = 0; j < 6; ++j) {
      S e = y[j] - path[k].S.a[j] / sbar;
      if (!isfinite_value(e))
        throw EvalError("non-finite baseline prediction", path_id, k);
      sum += e * e;
    }
  }
  return sum;
}

}  // namespace

double baseline_loss_stress(const BaselineModel& bm, const Dataset& ds,
                            const std::vector<int>& paths) {
  double sum = 0.0;
  int n = 0;
  for (int p : paths) {
    sum += baseline_path_sumsq<double>(bm, bm.params, ds.paths[p],
                                       ds.stress_scale, -1, p);
    n += static_cast<int>(ds.paths[p].size());
  }
  return sum / (6.0 * n);
}

FitResult fit_baseline(const Dataset& ds, const TrainConfig& cfg,
                       BaselineModel::Kind kind,
                       const std::vector<int>& train_paths,
                       BaselineModel* out_model, Exec exec) {
  FitResult out;
  BaselineModel bm = build_baseline(kind, cfg.seed);
  bm.stress_scale = ds.stress_scale;
  std::vector<int> paths = train_paths.empty() ? all_paths(ds) : train_paths;

  AdamState adam;
  ParamVector best = bm.params;
  double best_loss = std::numeric_limits<double>::infinity();

  auto run = [&](const std::vector<int>& ids, int max_steps, int epochs,
                 bool track_best) {
    AdamState stage_adam;
    AdamState& ad = track_best ? adam : stage_adam;
    const double denom = 6.0 * count_records(ds, ids, max_steps);
    for (int e = 0; e < epochs; ++e) {
      const int np = static_cast<int>(ids.size());
      std::vector<std::vector<double>> grads(np);
      std::vector<double> ls(np);
      std::vector<std::exception_ptr> errs(np);
      parallel_for(np, exec, [&](int i) {
        try {
          Tape& tape = scratch_tape();
          TapeScope scope(tape);
          ParamsT<Var> lifted = lift(bm.params);
          Var L = baseline_path_sumsq<Var>(bm, lifted, ds.paths[ids[i]],
                                           ds.stress_scale, max_steps, ids[i]);
          ls[i] = L.v;
          grads[i].assign(bm.params.flat.size(), 0.0);
          if (L.taped()) {
            tape.sweep(L.i);
            for (size_t k = 0; k < lifted.flat.size(); ++k)
              grads[i][k] = tape.adjoint(lifted.flat[k].i);
          }
        } catch (...) {
          errs[i] = std::current_exception();
        }
      });
      for (int i = 0; i < np; ++i)
        if (errs[i]) return false;
      ParamVector g;
      g.meta = bm.params.meta;
      g.offset = bm.params.offset;
      g.flat.assign(bm.params.flat.size(), 0.0);
      double sum = 0.0;
      for (int i = 0; i < np; ++i) {
        for (size_t k = 0; k < g.flat.size(); ++k) g.flat[k] += grads[i][k];
        sum += ls[i];
      }
      for (double& x : g.flat) x /= denom;
      EpochStats stt;
      stt.loss_stress = sum / denom;
      stt.loss_total = stt.loss_stress;
      out.history.push_back(stt);
      if (!std::isfinite(stt.loss_total)) return false;
      if (track_best && stt.loss_total < best_loss) {
        best_loss = stt.loss_total;
        best = bm.params;
      }
      // no gradient clipping and no constraints for the plain baselines
      adam_step(bm.params, g, ad, cfg.lr);
    }
    return true;
  };

  bool ok = true;
  if (cfg.pretrain_epochs > 0) {
    std::vector<int> pre(
        paths.begin(),
        paths.begin() + std::min<size_t>(cfg.pretrain_paths, paths.size()));
    ok = run(pre, cfg.pretrain_steps, cfg.pretrain_epochs, false);
  }
  if (ok) ok = run(paths, -1, cfg.epochs, true);
  out.aborted_nan = !ok;
  bm.params = std::isfinite(best_loss) ? best : bm.params;
  out.best_loss = std::isfinite(best_loss) ? best_loss : 0.0;
  if (out_model) *out_model = bm;
  return out;
}

std::vector<EvalRow> eval_report(const NetModel& m, const Dataset& ds,
                                 const std::vector<int>& paths,
                                 UpdateMode mode) {
  std::vector<EvalRow> rows;
  for (int p : paths) {
    const auto& path = ds.paths[p];
    std::vector<SymTensor3> Cs;
    std::vector<double> dts;
    for (const auto& r : path) {
      Cs.push_back(r.C);
      dts.push_back(r.dt);
    }
    std::vector<SymTensor3> Sp = simulate_path(m, Cs, dts, mode);
    EvalRow row;
    row.path = p;
    for (size_t k = 0; k < path.size(); ++k)
      for (int j = 0; j < 6; ++j) {
        double e = Sp[k].a[j] - path[k].S.a[j] / ds.stress_scale;
        row.mse[j] += e * e;
      }
    for (int j = 0; j < 6; ++j) {
      row.mse[j] /= static_cast<double>(path.size());
      row.total += row.mse[j] / 6.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dn
