#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "e2nn/acquisition.hpp"
#include "e2nn/ensemble.hpp"
#include "e2nn/posterior.hpp"
#include "e2nn/problems.hpp"

using namespace e2nn;

namespace {

Dataset forrester_data(int n) {
  const auto p = forrester_pair();
  Dataset d(p.bounds);
  for (int i = 0; i < n; ++i) {
    const Point x{static_cast<double>(i) / (n - 1)};
    d.add(x, p.hf(x));
  }
  return d;
}

void BM_TrainLastLayer(benchmark::State& state) {
  const auto p = forrester_pair();
  const auto d = forrester_data(static_cast<int>(state.range(1)));
  const auto arch = state.range(0) == 0 ? Architecture::small(d.size()) : Architecture::large(200, 5000);
  const auto m = E2nnModel::init({arch, Activation::fourier(1.5), 1}, p.emulator_set(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(m.train_last_layer(d));
}
BENCHMARK(BM_TrainLastLayer)->Args({0, 5})->Args({0, 20})->Args({1, 5})->Args({1, 20})->Unit(benchmark::kMillisecond);

void BM_EnsembleBuild(benchmark::State& state) {
  const auto p = forrester_pair();
  const auto d = forrester_data(static_cast<int>(state.range(0)));
  const EnsembleConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Ensemble::build(d, p.emulator_set(), cfg));
}
BENCHMARK(BM_EnsembleBuild)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_PosteriorPredictive(benchmark::State& state) {
  const auto p = forrester_pair();
  EnsembleConfig cfg;
  cfg.large_first_width = 20;
  cfg.large_second_width = 200;
  const auto ens = Ensemble::build(forrester_data(6), p.emulator_set(), cfg);
  const Point z{0.3};
  for (auto _ : state) benchmark::DoNotOptimize(ens.posterior_predictive(z));
}
BENCHMARK(BM_PosteriorPredictive);

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> y(static_cast<std::size_t>(state.range(0)));
  for (auto& v : y) v = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fuse_predictions(y));
}
BENCHMARK(BM_Fuse)->Arg(4)->Arg(16);

void BM_EiStudentT(benchmark::State& state) {
  double mu = -0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ei_student_t({mu, 0.7, 9.0, 0}, 0.0));
    mu += 1e-9;
  }
}
BENCHMARK(BM_EiStudentT);

void BM_EiGaussian(benchmark::State& state) {
  double mu = -0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ei_gaussian(mu, 0.7, 0.0));
    mu += 1e-9;
  }
}
BENCHMARK(BM_EiGaussian);

}  // namespace
BENCHMARK_MAIN();
