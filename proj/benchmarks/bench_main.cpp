#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "parkocc/densify/poisson.hpp"
#include "parkocc/occ/voxelize.hpp"
#include "parkocc/sim/lidar.hpp"
#include "parkocc/util/rng.hpp"

using namespace parkocc;
using geom::Vec3;

namespace {

sim::SceneModel lot() {
  sim::SceneConfig c;
  c.seed = 3;
  return sim::build_parking_lot(c);
}

void BM_Raycast(benchmark::State& state) {
  const auto scene = lot();
  const sim::SceneSnapshot snap(scene, 0.0);
  const Vec3 o = scene.ego_trajectory().pose_at(0.0).translation() + Vec3(0, 0, 2);
  util::Rng rng(1);
  std::vector<Vec3> dirs(4096);
  for (auto& d : dirs) d = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.2)).normalized();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(snap.cast(o, dirs[i++ & 4095], 80.0));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Raycast);

void BM_Scan(benchmark::State& state) {
  const auto scene = lot();
  sim::LidarSpec spec;
  spec.channels = static_cast<int>(state.range(0));
  const auto ego = scene.ego_trajectory().pose_at(0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_scan(scene, ego, spec, 0.0));
  }
  state.SetItemsProcessed(state.iterations() * spec.channels * spec.azimuth_steps);
}
BENCHMARK(BM_Scan)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PoissonSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double h = 1.0 / n;
  std::vector<double> b(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        b[i + n * (j + static_cast<std::size_t>(n) * k)] =
            std::sin(geom::kPi * (i + 0.5) * h) * std::sin(geom::kPi * (j + 0.5) * h) * std::sin(geom::kPi * (k + 0.5) * h);
  densify::SolverOptions opts;
  opts.boundary = densify::Boundary::Dirichlet;
  std::vector<double> u;
  for (auto _ : state) {
    u.clear();
    benchmark::DoNotOptimize(densify::solve_poisson({n, n, n}, h, b, u, opts));
  }
}
BENCHMARK(BM_PoissonSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Voxelize(benchmark::State& state) {
  util::Rng rng(2);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<Vec3> pts(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = Vec3(rng.uniform(-25, 25), rng.uniform(-25, 25), rng.uniform(-2, 4));
    labels[i] = static_cast<std::uint8_t>(rng.below(30));
  }
  const occ::GridSpec spec{};
  for (auto _ : state) {
    benchmark::DoNotOptimize(occ::voxelize(pts, labels, spec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Voxelize)->Arg(50000)->Arg(500000)->Unit(benchmark::kMillisecond);

void BM_NnTransfer(benchmark::State& state) {
  util::Rng rng(4);
  const occ::GridSpec spec{};
  occ::VoxelGrid dense(spec), sem(spec);
  const std::size_t nd = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < nd; ++i) dense.set(rng.below(spec.count()), occ::kUnlabeled);
  for (std::size_t i = 0; i < nd / 4; ++i) sem.set(rng.below(spec.count()), static_cast<std::uint8_t>(1 + rng.below(30)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(occ::nn_label_transfer(dense, sem));
  }
}
BENCHMARK(BM_NnTransfer)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
