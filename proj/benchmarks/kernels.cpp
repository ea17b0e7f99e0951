#include "hawkes/bmds.hpp"
#include "hawkes/gradients.hpp"
#include "hawkes/likelihood_cache.hpp"
#include "hawkes/model.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

namespace {

using namespace hawkes;

EventCatalog catalog_of(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> z(0.0, std::sqrt(static_cast<double>(n)) / 4.0);
  std::uniform_real_distribution<double> u(0.0, static_cast<double>(n) / 10.0);
  LocationMatrix x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
  std::vector<double> t(n);
  for (auto& v : t) v = u(rng);
  std::sort(t.begin(), t.end());
  return {std::move(x), std::move(t)};
}

HawkesParams params() {
  HawkesParams p;
  p.mu0 = 0.6;
  p.theta = 0.4;
  p.h = 0.5;
  p.tau_x = 2.0;
  p.omega = 1.0;
  p.tau_t = 3.0;
  return p;
}

// Arguments: N, workers, block width.
void BM_LogLikelihood(benchmark::State& state) {
  const auto catalog = catalog_of(static_cast<std::size_t>(state.range(0)));
  const ExecutionPlan plan{static_cast<std::size_t>(state.range(1)), static_cast<std::size_t>(state.range(2))};
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood_parallel(catalog, params(), plan));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_Gradient(benchmark::State& state) {
  const auto catalog = catalog_of(static_cast<std::size_t>(state.range(0)));
  const ExecutionPlan plan{static_cast<std::size_t>(state.range(1)), static_cast<std::size_t>(state.range(2))};
  for (auto _ : state) benchmark::DoNotOptimize(grad_locations_parallel(catalog, params(), plan));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void plans(benchmark::internal::Benchmark* b) {
  for (long n : {1000L, 5000L}) {
    for (long workers : {1L, 2L, 4L}) {
      for (long width : {1L, 4L}) b->Args({n, workers, width});
    }
  }
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

BENCHMARK(BM_LogLikelihood)->Apply(plans);
BENCHMARK(BM_Gradient)->Apply(plans);

void BM_CacheLocationMove(benchmark::State& state) {
  const auto catalog = catalog_of(static_cast<std::size_t>(state.range(0)));
  LikelihoodCache cache(catalog, params());
  std::vector<std::size_t> block(10);
  for (std::size_t i = 0; i < block.size(); ++i) block[i] = i * 7;
  LocationMatrix moved(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) moved.row(i) = catalog.locations().row(static_cast<Eigen::Index>(block[static_cast<std::size_t>(i)])).array() + 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(cache.propose_locations(block, moved));
}
BENCHMARK(BM_CacheLocationMove)->Arg(450)->Arg(5000);

void BM_CacheLengthscaleMove(benchmark::State& state) {
  const auto catalog = catalog_of(static_cast<std::size_t>(state.range(0)));
  LikelihoodCache cache(catalog, params());
  auto p = params();
  p.h = 0.45;
  for (auto _ : state) benchmark::DoNotOptimize(cache.propose_params(p));
}
BENCHMARK(BM_CacheLengthscaleMove)->Arg(450)->Arg(5000);

void BM_BmdsGradient(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  LocationMatrix x(n, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
  Eigen::MatrixXd y(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) y(i, j) = y(j, i) = i == j ? 0.0 : (x.row(i) - x.row(j)).norm() + 0.1;
  }
  const DistanceMatrix dm(y);
  for (auto _ : state) benchmark::DoNotOptimize(bmds_grad_locations(dm, {x, 0.5}));
}
BENCHMARK(BM_BmdsGradient)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
