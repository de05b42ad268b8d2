#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "nbmoe/analysis.hpp"
#include "nbmoe/evaluation.hpp"
#include "nbmoe/training.hpp"

using namespace nbmoe;

namespace {

num::Tensor random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  num::Tensor t(rows, cols);
  for (double& v : t.data()) v = 2.0 * num::uniform01(seed) - 1.0;
  return t;
}

model::ModelConfig bench_config(model::Variant v) {
  model::ModelConfig c;
  c.horizon = 18;
  c.lookback_multiplier = 2;
  c.mlp_units = {256, 256};
  c.blocks_per_stack = 3;
  model::apply_variant(c, v, 4, 2);
  return c;
}

void BM_Forward(benchmark::State& state) {
  const auto v = static_cast<model::Variant>(state.range(0));
  const model::Model m(bench_config(v), 1);
  const auto x = random_batch(128, m.config().lookback(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(x).forecast);
  state.SetLabel(std::string(model::to_string(v)));
  state.SetItemsProcessed(state.iterations() * 128);
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto v = static_cast<model::Variant>(state.range(0));
  model::Model m(bench_config(v), 1);
  const auto x = random_batch(128, m.config().lookback(), 2);
  const auto y = random_batch(128, m.config().horizon, 3);
  for (auto _ : state) {
    num::Tape tape;
    num::BoundParameters bound(tape, m.parameters());
    auto loss = train::mae_loss(m.forward(bound, tape.constant(x)).forecast, tape.constant(y));
    tape.backward(loss);
    benchmark::DoNotOptimize(bound.gradients());
  }
  state.SetLabel(std::string(model::to_string(v)));
  state.SetItemsProcessed(state.iterations() * 128);
}

void BM_Stl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> y(n);
  std::uint64_t seed = 4;
  for (std::size_t t = 0; t < n; ++t)
    y[t] = 0.1 * static_cast<double>(t) + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 12.0) +
           0.1 * num::uniform01(seed);
  for (auto _ : state) benchmark::DoNotOptimize(analysis::stl_decompose(y, 12));
  state.SetComplexityN(state.range(0));
}

void BM_Smape(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_batch(1, n, 5), f = random_batch(1, n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(eval::smape(a.data(), f.data()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Forward)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stl)->RangeMultiplier(4)->Range(48, 3072)->Complexity();
BENCHMARK(BM_Smape)->Range(8, 4096);
BENCHMARK_MAIN();
