// Serial-vs-OpenMP comparison of the data-parallel kernels: property sweeps,
// dataset generation, and the per-epoch gradient.
#include <benchmark/benchmark.h>

#include <random>

#include "dissipnet/refmodel.hpp"
#include "dissipnet/train.hpp"

using namespace dn;

namespace {

struct FlowBench {
  ParamVector pv;
  Topology topo;
  std::vector<SymTensor3> sigmas;
  std::vector<UnitVector3> n1s, n2s;
  std::vector<double> js;

  explicit FlowBench(int n) {
    topo = build_default_topology(pv);
    init_params(pv, 3);
    project_constraints(pv);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 30.0);
    std::normal_distribution<double> nu(0.0, 1.0);
    std::uniform_real_distribution<double> ju(0.5, 2.0);
    for (int i = 0; i < n; ++i) {
      Tensor3 m;
      for (auto& x : m.a) x = nd(rng);
      sigmas.push_back(sym(m));
      n1s.push_back(make_unit(nu(rng), nu(rng), nu(rng)));
      n2s.push_back(make_unit(nu(rng), nu(rng), nu(rng)));
      js.push_back(ju(rng));
    }
  }

  double run(Exec exec) {
    std::vector<double> diss(sigmas.size());
    parallel_for(static_cast<int>(sigmas.size()), exec, [&](int i) {
      SymTensor3 D = flow_rate(topo, pv, sigmas[i], promote_vec<double>(n1s[i]),
                               promote_vec<double>(n2s[i]), js[i]);
      diss[i] = ddot(sigmas[i], D);
    });
    double acc = 0.0;
    for (double d : diss) acc += d;
    return acc;
  }
};

void bm_flow_sweep_serial(benchmark::State& state) {
  FlowBench fb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fb.run(Exec::Serial));
}

void bm_flow_sweep_omp(benchmark::State& state) {
  FlowBench fb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fb.run(Exec::Parallel));
}

void bm_gen_data_serial(benchmark::State& state) {
  for (auto _ : state) {
    setenv("DISSIPNET_THREADS", "1", 1);
    Dataset ds = generate_dataset(4, 40, 0.05, true, UnitVector3{1, 0, 0}, 7);
    unsetenv("DISSIPNET_THREADS");
    benchmark::DoNotOptimize(ds.stress_scale);
  }
}

void bm_gen_data_omp(benchmark::State& state) {
  for (auto _ : state) {
    Dataset ds = generate_dataset(4, 40, 0.05, true, UnitVector3{1, 0, 0}, 7);
    benchmark::DoNotOptimize(ds.stress_scale);
  }
}

struct GradBench {
  Dataset ds;
  ParamVector theta;
  Topology topo;
  std::vector<int> ids{0, 1, 2, 3};

  GradBench()
      : ds(generate_dataset(4, 20, 0.05, true, UnitVector3{1, 0, 0}, 7)) {
    topo = build_default_topology(theta);
    init_params(theta, 3);
    project_constraints(theta);
  }

  double run(Exec exec) {
    EpochGradient eg = epoch_gradient(topo, theta, ds, ids, ds.n, 1000.0,
                                      kLambdaGr, -1, exec);
    return eg.stats.loss_total;
  }
};

void bm_epoch_gradient_serial(benchmark::State& state) {
  GradBench gb;
  for (auto _ : state) benchmark::DoNotOptimize(gb.run(Exec::Serial));
}

void bm_epoch_gradient_omp(benchmark::State& state) {
  GradBench gb;
  for (auto _ : state) benchmark::DoNotOptimize(gb.run(Exec::Parallel));
}

}  // namespace

BENCHMARK(bm_flow_sweep_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_flow_sweep_omp)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gen_data_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gen_data_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_epoch_gradient_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_epoch_gradient_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
