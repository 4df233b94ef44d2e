#include <benchmark/benchmark.h>

#include <random>

#include <bbabc/abc_engine.hpp>
#include <bbabc/posterior.hpp>

namespace {

bbabc::StudyDesign design(std::size_t examiners) {
  bbabc::StudyDesign d;
  for (std::size_t j = 0; j < examiners; ++j) {
    d.examiner_ids.push_back("E" + std::to_string(j));
    d.n_mated.push_back(69);
    d.n_nonmated.push_back(33);
    d.stream_keys.push_back(j);
  }
  return d;
}

void BM_SimulateStudy(benchmark::State& state) {
  const bbabc::PriorConfig prior;
  const auto d = design(static_cast<std::size_t>(state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    const auto draw = bbabc::simulate_study(prior, d, bbabc::RngStream(7, i++));
    benchmark::DoNotOptimize(bbabc::population_summary(draw.counts));
  }
}
BENCHMARK(BM_SimulateStudy)->Arg(1)->Arg(169);

void BM_Hdi(benchmark::State& state) {
  std::mt19937_64 eng(1);
  std::normal_distribution<double> norm;
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (double& x : v) x = norm(eng);
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::hdi(v, 0.95));
}
BENCHMARK(BM_Hdi)->Arg(1000)->Arg(100000);

void BM_Adjust(benchmark::State& state) {
  std::mt19937_64 eng(2);
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  const auto m = static_cast<Eigen::Index>(state.range(0));
  Eigen::MatrixXd s(m, 14);
  std::vector<double> theta(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < 14; ++j) s(i, j) = 100.0 * unif(eng);
    theta[static_cast<std::size_t>(i)] = unif(eng);
    w[static_cast<std::size_t>(i)] = unif(eng);
  }
  const std::vector<double> obs(14, 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(bbabc::adjust(theta, s, obs, w, bbabc::AdjustmentOptions{}));
}
BENCHMARK(BM_Adjust)->Arg(1000);

}  // namespace
