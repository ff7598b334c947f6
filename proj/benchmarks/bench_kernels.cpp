#include "rigidity/inequality.hpp"
#include "rigidity/matrixops.hpp"
#include "rigidity/norms.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace rigidity;

std::vector<Mat3> random_matrices(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<Mat3> out(n);
  for (auto& m : out) {
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = g(rng);
  }
  return out;
}

void BM_DistSO3(benchmark::State& state) {
  const auto mats = random_matrices(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist_so3(mats[i++ & 1023]));
  }
}
BENCHMARK(BM_DistSO3);

void BM_FrameGradient(benchmark::State& state) {
  const SurfacePtr s = make_sphere();
  const FrameField f = polynomial_test_field(s);
  const CoordRect& r = s->domain();
  for (auto _ : state) {
    benchmark::DoNotOptimize(frame_gradient(f, *s, 0.01, r.theta_center(), r.z_center()));
  }
}
BENCHMARK(BM_FrameGradient);

void BM_BuildGrid(benchmark::State& state) {
  const ThinDomain d(make_sphere(), ThicknessProfile::shell(1e-2));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_grid(d, {8, n, n}).size());
  }
  state.SetItemsProcessed(state.iterations() * 8 * n * n);
}
BENCHMARK(BM_BuildGrid)->Arg(32)->Arg(64)->Arg(128);

void BM_InterpolationSides(benchmark::State& state) {
  const SurfacePtr s = make_sphere();
  const double h = 1e-2;
  const ThinDomain d(s, ThicknessProfile::shell(h));
  const QuadratureGrid grid = build_grid(d, {8, static_cast<int>(state.range(0)), 64});
  AnsatzProfile a = AnsatzProfile::centered_on(s->domain());
  a.xi_half = 0.2 / std::sqrt(0.1);
  const FrameField y = identity_plus(s, h, ansatz_field(a, s, h));
  for (auto _ : state) {
    benchmark::DoNotOptimize(interpolation_sides(y, Mat3::Identity(), std::nullopt, grid, 2.0).ratio);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_InterpolationSides)->Arg(64)->Arg(160);

}  // namespace
BENCHMARK_MAIN();
