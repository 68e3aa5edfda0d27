#include <benchmark/benchmark.h>

#include "nonconc/density.hpp"
#include "nonconc/diagonal.hpp"
#include "nonconc/functionals.hpp"
#include "nonconc/gallery.hpp"
#include "nonconc/hausdorff.hpp"
#include "nonconc/radon.hpp"
#include "nonconc/random.hpp"
#include "phi_examples.hpp"
#include "random_gamma.hpp"

using namespace nonconc;

static void BM_WedgeBuild(benchmark::State& state) {
  Rng rng = make_rng(1, 0);
  GammaSpec g = testing::random_gamma(rng, 2, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_phi_wedge(g));
}
BENCHMARK(BM_WedgeBuild)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_JacobianBuild(benchmark::State& state) {
  Rng rng = make_rng(1, 0);
  GammaSpec g = testing::random_gamma(rng, 2, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_phi_jacobian(g));
}
BENCHMARK(BM_JacobianBuild)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_OrderDeterminantal(benchmark::State& state) {
  PhiSpec phi = phi_determinantal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(order_of_vanishing(phi));
}
BENCHMARK(BM_OrderDeterminantal)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_DensityDet2(benchmark::State& state) {
  PhiSpec phi = testing::det2_phi();
  std::vector<Rational> x(4, Rational(0));
  DensityOptions d;
  d.starts = static_cast<std::size_t>(state.range(0));
  d.threads = 1;
  d.run_positivity = false;
  for (auto _ : state) benchmark::DoNotOptimize(density_infimum(phi, 2, x, d));
}
BENCHMARK(BM_DensityDet2)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_PositivityDet2(benchmark::State& state) {
  PhiSpec phi = testing::det2_phi();
  std::vector<Rational> x(4, Rational(0));
  DensityOptions d;
  d.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(positivity_criterion(phi, 2, x, 200, d));
}
BENCHMARK(BM_PositivityDet2)->Unit(benchmark::kMillisecond);

static void BM_SupMixed(benchmark::State& state) {
  PhiSpec phi = testing::mixed_order_phi();
  SupOptions o;
  o.budget = static_cast<std::size_t>(state.range(0));
  o.threads = 1;
  SetSpec E = SetSpec::box({0, 0}, {1, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(sup_functional(phi, E, o));
}
BENCHMARK(BM_SupMixed)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_IntDet2(benchmark::State& state) {
  PhiSpec phi = testing::det2_phi();
  IntOptions o;
  o.budget = static_cast<std::size_t>(state.range(0));
  o.threads = 1;
  SetSpec E = SetSpec::box({0, 0, 0, 0}, {1, 1, 1, 1});
  for (auto _ : state) benchmark::DoNotOptimize(int_functional(phi, MeasureSpec::lebesgue(), E, o));
}
BENCHMARK(BM_IntDet2)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_CoverMixed(benchmark::State& state) {
  PhiSpec phi = testing::mixed_order_phi();
  CoverOptions o;
  o.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(cover_upper(phi, 1.0, Box{{0, 0}, {1, 1}}, static_cast<unsigned>(state.range(0)), o));
}
BENCHMARK(BM_CoverMixed)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_OperatorNormLine(benchmark::State& state) {
  RadonCase rc;
  rc.gamma = testing::line_gamma();
  rc.t_window = Box{{0.0}, {1.0}};
  rc.x_window = Box{{-17.0, -16.0}, {18.0, 16.0}};
  SetSpec F = SetSpec::box({0.1, 0.2}, {0.8, 0.7});
  const auto grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(rc, F, 3.0, grid, 2 * grid, 1));
}
BENCHMARK(BM_OperatorNormLine)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
