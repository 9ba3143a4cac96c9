// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "dln/circuit.hpp"
#include "dln/logic.hpp"
#include "dln/network.hpp"
#include "test_util.hpp"

namespace {

dln::dln_model bench_model(int hidden) {
  const dln::feature_matrix data = testutil::threshold_task(200, 17, false);
  dln::train_config cfg;
  cfg.hidden_sizes = {hidden, hidden / 2};
  cfg.group_size = 10;
  cfg.seed = 17;
  return dln::build(cfg, data);
}

void BM_SoftLogicMixture(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a = unit(rng), b = unit(rng);
  for (auto _ : state) {
    double acc = 0.0;
    for (int k = 0; k < dln::kOperatorCount; ++k) acc += dln::soft_logic(k, a, b);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_SoftLogicMixture);

void BM_SoftPredict(benchmark::State& state) {
  const dln::dln_model m = bench_model(static_cast<int>(state.range(0)));
  const std::vector<double> x{0.3, 0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dln::soft_predict(m, x, 0.5));
  }
}
BENCHMARK(BM_SoftPredict)->Arg(16)->Arg(64);

void BM_HardPredict(benchmark::State& state) {
  const dln::dln_model m = bench_model(static_cast<int>(state.range(0)));
  const std::vector<double> x{0.3, 0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dln::hard_predict(m, x));
  }
}
BENCHMARK(BM_HardPredict)->Arg(16)->Arg(64);

void BM_CircuitEvaluate(benchmark::State& state) {
  const dln::dln_model m = bench_model(static_cast<int>(state.range(0)));
  const dln::circuit_model c =
      dln::simplify_rules(dln::fold_constants(dln::discretize(m)));
  const std::vector<double> x{0.3, 0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dln::evaluate(c, x));
  }
}
BENCHMARK(BM_CircuitEvaluate)->Arg(16)->Arg(64);

void BM_TrainEpoch(benchmark::State& state) {
  const dln::feature_matrix data = testutil::threshold_task(256, 23, false);
  for (auto _ : state) {
    dln::train_config cfg;
    cfg.hidden_sizes = {16};
    cfg.group_size = 4;
    cfg.epochs = 1;
    cfg.seed = 23;
    dln::dln_model m = dln::build(cfg, data);
    dln::train(m, data);
    benchmark::DoNotOptimize(m.train_loss);
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
