#include <benchmark/benchmark.h>

#include "m2e/clustering.hpp"
#include "m2e/datagen.hpp"
#include "m2e/random.hpp"
#include "m2e/solver.hpp"
#include "m2e/tensor.hpp"

namespace {

using namespace m2e;

Tensor3 random_tensor(Index m, Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Matrix values = standard_normal(m * m, n, rng);
  Tensor3 t(m, m, n);
  std::copy(values.data(), values.data() + values.size(), t.data().begin());
  return t;
}

void BM_Mttkrp(benchmark::State& state) {
  const Index m = state.range(0);
  const Index n = state.range(1);
  const Index r = 8;
  const Tensor3 t = random_tensor(m, n, 1);
  Rng rng = make_rng(2);
  const Matrix a = standard_normal(m, r, rng);
  const Matrix c = standard_normal(n, r, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mttkrp(t, 1, a, c));
  }
  state.SetItemsProcessed(state.iterations() * m * m * n * r);
}
BENCHMARK(BM_Mttkrp)->Args({30, 20})->Args({30, 80})->Args({90, 70});

void BM_KhatriRao(benchmark::State& state) {
  const Index rows = state.range(0);
  Rng rng = make_rng(3);
  const Matrix a = standard_normal(rows, 8, rng);
  const Matrix b = standard_normal(rows, 8, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(khatri_rao(a, b));
  }
}
BENCHMARK(BM_KhatriRao)->Arg(20)->Arg(90);

// Ten outer iterations per call; N doubles across the arguments.
void BM_M2eIterations(benchmark::State& state) {
  SyntheticSpec spec;
  spec.nodes = 30;
  spec.cluster_sizes = {state.range(0) / 2, state.range(0) - state.range(0) / 2};
  spec.latent_rank = 5;
  const SyntheticDataset data = generate(spec);
  M2eConfig config;
  config.lambdas = {1.0, 1.0};
  config.rank = 5;
  config.max_outer_iters = 10;
  config.obj_rel_tol = 1e-300;
  config.residual_tol = 1e-300;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m2e_fit(data.views, config));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_M2eIterations)->RangeMultiplier(2)->Range(20, 160)->Complexity(benchmark::oN);

void BM_KMeans(benchmark::State& state) {
  Rng rng = make_rng(4);
  const Matrix points = standard_normal(state.range(0), 7, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(points, {2, 20, 100, 5}));
  }
}
BENCHMARK(BM_KMeans)->Arg(70)->Arg(97);

}  // namespace

BENCHMARK_MAIN();
