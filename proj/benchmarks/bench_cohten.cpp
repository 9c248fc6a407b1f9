// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the numerically heavy paths. Run the binary directly;
// see google-benchmark's --benchmark_filter for subsetting.

#include <cstdint>
#include <optional>
#include <random>

#include <benchmark/benchmark.h>

#include "cohten/array_model.hpp"
#include "cohten/coherence.hpp"
#include "cohten/rng.hpp"
#include "cohten/solve.hpp"
#include "cohten/tensor.hpp"

namespace {

using namespace cohten;

CpModel random_model(std::uint64_t seed, int dim, int r) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXcd lambda(r);
  for (int p = 0; p < r; ++p) lambda(p) = complex_gaussian(rng) + cx(2.0, 0);
  Eigen::MatrixXcd u = random_unit_columns(rng, dim, r);
  Eigen::MatrixXcd v = random_unit_columns(rng, dim, r);
  Eigen::MatrixXcd w = random_unit_columns(rng, dim, r);
  return CpModel(std::move(lambda), std::move(u), std::move(v),
                 std::move(w));
}

Tensor3 random_tensor(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  Tensor3 a(dim, dim, dim);
  for (auto& z : a.data()) z = complex_gaussian(rng);
  return a;
}

void BM_CpEvaluate(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  CpModel m = random_model(1, dim, 4);
  for (auto _ : state) benchmark::DoNotOptimize(cp_evaluate(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CpEvaluate)->Arg(8)->Arg(16)->Arg(32)->Complexity();

void BM_Residual(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  CpModel m = random_model(2, dim, 4);
  Tensor3 a = random_tensor(3, dim);
  for (auto _ : state) benchmark::DoNotOptimize(residual(a, m));
}
BENCHMARK(BM_Residual)->Arg(8)->Arg(16)->Arg(32);

void BM_AlsSweeps(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Tensor3 a = cp_evaluate(random_model(4, dim, 3));
  SolverOptions opts;
  opts.r = 3;
  opts.max_iter = 25;
  opts.rel_tol = 0.0;  // run the full sweep budget
  opts.restarts = 1;
  opts.seed = 9;
  for (auto _ : state) benchmark::DoNotOptimize(als_decompose(a, opts));
}
BENCHMARK(BM_AlsSweeps)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_ConstrainedSweeps(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Tensor3 a = cp_evaluate(random_model(5, dim, 3));
  SolverOptions opts;
  opts.r = 3;
  opts.max_iter = 25;
  opts.rel_tol = 0.0;
  opts.restarts = 1;
  opts.seed = 10;
  opts.mu_caps = {{0.6, 0.6, 0.6}};
  for (auto _ : state)
    benchmark::DoNotOptimize(constrained_decompose(a, opts));
}
BENCHMARK(BM_ConstrainedSweeps)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SparkExhaustive(benchmark::State& state) {
  const int cols = static_cast<int>(state.range(0));
  std::mt19937_64 rng(6);
  ColumnSet cs(random_unit_columns(rng, 4, cols));
  for (auto _ : state) benchmark::DoNotOptimize(spark(cs));
}
BENCHMARK(BM_SparkExhaustive)->Arg(8)->Arg(12)->Arg(16);

void BM_Coherence(benchmark::State& state) {
  const int cols = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  ColumnSet cs(random_unit_columns(rng, 32, cols));
  for (auto _ : state) benchmark::DoNotOptimize(coherence(cs));
}
BENCHMARK(BM_Coherence)->Arg(8)->Arg(64);

void BM_Synthesize(benchmark::State& state) {
  ArrayScenario scn;
  const int sensors = static_cast<int>(state.range(0));
  for (int i = 0; i < sensors; ++i)
    scn.sensors.push_back({0.5 * i, 0.0, 0.0});
  scn.translations = {{0, 0, 0}, {0.2, 0, 0}, {0, 0.2, 0}, {0.2, 0.2, 0}};
  scn.omega = 6.0;
  scn.celerity = 1.0;
  scn.snapshots = 64;
  for (int p = 0; p < 3; ++p) {
    Source s;
    s.direction = Eigen::Vector3d(p == 0, p == 1, p == 2);
    s.envelope.kind = EnvelopeSpec::Kind::gaussian;
    scn.sources.push_back(s);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(synthesize(scn, 20.0, 42));
}
BENCHMARK(BM_Synthesize)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
