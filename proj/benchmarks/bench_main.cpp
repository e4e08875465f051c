#include <benchmark/benchmark.h>

#include <memory>

#include "tsss/energy.hpp"
#include "tsss/estimator.hpp"
#include "tsss/simulation.hpp"

namespace {

using namespace tsss;

std::shared_ptr<const TriMesh> octahedron(int levels) {
  return std::make_shared<const TriMesh>(refine(base_mesh(BaseMesh::Octahedron), levels));
}

Dataset m1_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.locations = make_grid(GridKind::LatLong, n);
  for (const auto& x : data.locations) data.responses.push_back(eval_m1(x) + 0.4 * rng.normal());
  return data;
}

void BM_Locate(benchmark::State& state) {
  const auto mesh = octahedron(static_cast<int>(state.range(0)));
  const auto pts = make_grid(GridKind::Fibonacci, 4096);
  for (auto _ : state) {
    for (const auto& p : pts) benchmark::DoNotOptimize(mesh->locate(p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_Locate)->DenseRange(1, 5);

void BM_AssemblePenalty(benchmark::State& state) {
  const auto mesh = octahedron(2);
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_penalty(*mesh, d));
}
BENCHMARK(BM_AssemblePenalty)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_SplineSpace(benchmark::State& state) {
  const auto mesh = octahedron(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(SplineSpace(mesh, 3, 1));
}
BENCHMARK(BM_SplineSpace)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const SplineSpace space(octahedron(static_cast<int>(state.range(0))), 3, 1);
  const Dataset data = m1_data(2500, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit(data, space, 0.1));
}
BENCHMARK(BM_Fit)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_CrossValidation(benchmark::State& state) {
  const auto mesh = octahedron(1);
  const Dataset data = m1_data(400, 2);
  CvOptions opts;
  opts.degrees = {2, 3, 4, 5};
  for (auto _ : state) benchmark::DoNotOptimize(kfold_cv(data, mesh, opts));
}
BENCHMARK(BM_CrossValidation)->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
  const SplineSpace space(octahedron(2), 3, 1);
  const Dataset data = m1_data(2500, 3);
  const auto query = make_grid(GridKind::Fibonacci, 500);
  BootstrapOptions opts;
  opts.replicates = 50;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_se(data, space, 0.1, query, opts));
}
BENCHMARK(BM_Bootstrap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
