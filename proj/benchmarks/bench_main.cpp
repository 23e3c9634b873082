#include <benchmark/benchmark.h>

#include "drokit/optimizers.hpp"
#include "drokit/sampling.hpp"
#include "drokit/simplex.hpp"

namespace {

using namespace drokit;

void BM_EntropicProx(benchmark::State& state) {
  const auto c = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  Vector grad(c);
  for (Eigen::Index i = 0; i < c; ++i) grad[i] = rng.normal();
  const SimplexWeights pi = SimplexWeights::uniform(c);
  for (auto _ : state) benchmark::DoNotOptimize(entropic_prox_step(pi, grad, 0.1, 0.5));
}
BENCHMARK(BM_EntropicProx)->Arg(4)->Arg(64)->Arg(1024);

void BM_ConstrainedProx(benchmark::State& state) {
  const auto c = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  Vector grad(c);
  for (Eigen::Index i = 0; i < c; ++i) grad[i] = 5.0 * rng.normal();
  const SimplexWeights pi = SimplexWeights::uniform(c);
  const double set_floor = 0.1 / static_cast<double>(c);
  for (auto _ : state) benchmark::DoNotOptimize(constrained_prox_step(pi, grad, 1.0, 0.5, set_floor));
}
BENCHMARK(BM_ConstrainedProx)->Arg(4)->Arg(64)->Arg(1024);

void BM_SampleEstimate(benchmark::State& state) {
  const auto strategy = static_cast<SamplingStrategy>(state.range(0));
  const ImbalancedLogistic data = make_imbalanced_logistic(1, 10, 500, 10.0);
  const ParameterVector theta = ParameterVector::Constant(11, 0.1);
  const SimplexWeights pi = data.problem.initial_weights();
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_estimate(strategy, data.problem, pi, theta, 32, rng));
  state.SetLabel(to_string(strategy));
}
BENCHMARK(BM_SampleEstimate)->DenseRange(0, 2);

void BM_OmpStep(benchmark::State& state) {
  const DroProblem p = make_quadratic_problem(1, 10, static_cast<std::size_t>(state.range(0)), 4);
  OmpConfig cfg;
  cfg.gamma = 0.01;
  OmpState s = omp_init(p, ParameterVector::Zero(10), p.initial_weights());
  for (auto _ : state) {
    s = omp_step(s, p, cfg);
    benchmark::DoNotOptimize(s.theta.data());
  }
}
BENCHMARK(BM_OmpStep)->Arg(8)->Arg(64);

void BM_AlsoStep(benchmark::State& state) {
  const ImbalancedLogistic data = make_imbalanced_logistic(1, 10, 500, 10.0);
  AlsoConfig cfg;
  cfg.batch = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  AlsoState s = also_init(data.problem, cfg, ParameterVector::Zero(11));
  for (auto _ : state) {
    s = also_step(s, data.problem, cfg, rng);
    benchmark::DoNotOptimize(s.theta.data());
  }
}
BENCHMARK(BM_AlsoStep)->Arg(8)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
