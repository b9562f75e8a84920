#include <benchmark/benchmark.h>

#include <random>

#include "hyperbolax/regions.hpp"

using namespace hyperbolax;

static void BM_locate(benchmark::State& state) {
  LatticeConfig cfg(3);
  Dyadic N(0), r(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> points;
  for (int i = 0; i < 256; ++i) {
    double rho = 0.5 + 1.5 * u(rng);
    double ex = cfg.ell * (2.0 * u(rng) - 1.0);
    double ey = cfg.ell * (2.0 * u(rng) - 1.0);
    double s = std::sqrt(1.0 - ex * ex - ey * ey);
    points.push_back({rho * ex, rho * ey, rho * s});
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(locate(cfg, N, r, points[i++ & 255]));
  }
}
BENCHMARK(BM_locate)->Arg(-4)->Arg(-10)->Arg(-20);

static void BM_separated_partners(benchmark::State& state) {
  LatticeConfig cfg(3);
  Dyadic N(0), r(static_cast<int>(state.range(0)));
  RegionId id = *locate(cfg, N, r, Vec{0.01, -0.015, 1.2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(separated_partners(cfg, id));
  }
}
BENCHMARK(BM_separated_partners)->Arg(-4)->Arg(-8);

static void BM_whitney_cover_triple(benchmark::State& state) {
  LatticeConfig cfg(3);
  Dyadic N(0);
  Vec xi{0.01, -0.015, 1.2}, eta{-0.03, 0.02, 0.9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(whitney_cover_triple(cfg, N, xi, eta));
  }
}
BENCHMARK(BM_whitney_cover_triple);

BENCHMARK_MAIN();
