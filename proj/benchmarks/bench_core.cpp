#include <benchmark/benchmark.h>

#include <random>

#include "carnot/blowup.hpp"
#include "carnot/catalog.hpp"
#include "carnot/groups.hpp"
#include "carnot/measure.hpp"

using namespace carnot;

namespace {

const HomogeneousNorm& engel_norm() {
  static const HomogeneousNorm norm(engel4(), {1.0, 1.0, 1.0});
  return norm;
}

Point random_point(std::mt19937_64& rng, std::size_t q) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Point x(static_cast<Eigen::Index>(q));
  for (auto& v : x) v = d(rng);
  return x;
}

}  // namespace

static void BM_GroupLawCompute(benchmark::State& state) {
  const StratifiedAlgebra a = state.range(0) == 0 ? engel4() : e5();
  for (auto _ : state) benchmark::DoNotOptimize(GroupLaw::compute(a));
}
BENCHMARK(BM_GroupLawCompute)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Multiply(benchmark::State& state) {
  const GroupLaw& law = *catalog_entry("engel4").law;
  std::mt19937_64 rng(1);
  const Point x = random_point(rng, 4), y = random_point(rng, 4);
  for (auto _ : state) benchmark::DoNotOptimize(law.multiply(x, y));
}
BENCHMARK(BM_Multiply);

static void BM_Relative(benchmark::State& state) {
  const GroupLaw& law = *catalog_entry("engel4").law;
  std::mt19937_64 rng(2);
  const Point x = random_point(rng, 4), y = random_point(rng, 4);
  for (auto _ : state) benchmark::DoNotOptimize(law.relative(x, y));
}
BENCHMARK(BM_Relative);

static void BM_TangentPVector(benchmark::State& state) {
  const Submanifold& m = catalog_submanifold("engel4", "deg4-parabola");
  const std::vector<double> u{0.7, -0.3};
  for (auto _ : state) benchmark::DoNotOptimize(tangent_pvector(m, u));
}
BENCHMARK(BM_TangentPVector);

static void BM_DensityRatio(benchmark::State& state) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  DensityOptions options;
  options.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(density_ratio(m, std::vector<double>{0, 0}, 0.05, engel_norm(), options));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DensityRatio)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

static void BM_Hausdorff(benchmark::State& state) {
  const Submanifold& m = catalog_submanifold("engel4", "deg3-exp");
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud sigma = dilated_sample(m, std::vector<double>{0, 0}, 0.1, 1.0, n, engel_norm(), 1);
  const Subspace pi = pi_sigma(adapted_frame(m, std::vector<double>{0, 0}));
  const PointCloud limit = candidate_sample(subspace_candidate(pi), engel_norm(), 1.0, n, 2);
  DistanceOptions options;
  options.refine = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff_distance(sigma, limit, m.law(), engel_norm(), options));
}
BENCHMARK(BM_Hausdorff)->Args({500, 0})->Args({2000, 0})->Args({2000, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
