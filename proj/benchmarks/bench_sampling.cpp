#include <benchmark/benchmark.h>

#include <bbabc/sampling.hpp>

namespace {

void BM_Gamma(benchmark::State& state) {
  bbabc::RngStream rng(1, 0);
  const double shape = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::sample_gamma(shape, rng));
}
BENCHMARK(BM_Gamma)->Arg(1)->Arg(5)->Arg(30)->Arg(400);

void BM_Dirichlet(benchmark::State& state) {
  bbabc::RngStream rng(1, 0);
  const bbabc::CategoryValues alpha{3.0, 0.5, 0.5, 2.0, 2.0, 0.5, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::sample_dirichlet(alpha, rng));
}
BENCHMARK(BM_Dirichlet);

void BM_Binomial(benchmark::State& state) {
  bbabc::RngStream rng(1, 0);
  const double p = static_cast<double>(state.range(1)) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::sample_binomial(state.range(0), p, rng));
}
BENCHMARK(BM_Binomial)->Args({70, 5})->Args({70, 300})->Args({5000, 300});

void BM_Multinomial(benchmark::State& state) {
  bbabc::RngStream rng(1, 0);
  const auto theta = bbabc::RateVector::from({0.3, 0.014, 0.039, 0.174, 0.16, 0.003, 0.31});
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::sample_multinomial(state.range(0), theta, rng));
}
BENCHMARK(BM_Multinomial)->Arg(70)->Arg(11578);

}  // namespace
