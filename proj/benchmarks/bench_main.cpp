#include <benchmark/benchmark.h>

#include "bgn/regress.hpp"
#include "bgn/train.hpp"
#include "generators.hpp"

using namespace bgn;

static void BM_OptimalBias(benchmark::State& state) {
  testkit::Gen gen(1);
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Matrix x = gen.normal_matrix(m, 8);
  const Matrix r = gen.normal_matrix(m, 2);
  const Vector w = gen.normal_vector(8);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_bias(w, x, r));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalBias)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oNLogN);

static void BM_LassoFit(benchmark::State& state) {
  testkit::Gen gen(2);
  const RegressionProblem prob =
      gen.regression_problem(static_cast<Eigen::Index>(state.range(0)), state.range(1), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_fit(prob, 0.05));
}
BENCHMARK(BM_LassoFit)->Args({1000, 10})->Args({10000, 10})->Args({10000, 50});

static void BM_BuildLayer(benchmark::State& state) {
  testkit::Gen gen(3);
  const auto m = static_cast<Eigen::Index>(state.range(0));
  const Dataset train = gen.regression_dataset(m, 5, 1);
  const Dataset val = gen.regression_dataset(m / 4, 5, 1);
  TrainConfig cfg;
  cfg.max_hidden_layers = 1;
  cfg.max_neurons_per_layer = 30;
  for (auto _ : state) {
    LambdaSchedule lambda{cfg.lasso.lambda0};
    benchmark::DoNotOptimize(
        build_layer(train.features(), train.labels(), val.features(), val.labels(), cfg, lambda));
  }
}
BENCHMARK(BM_BuildLayer)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
