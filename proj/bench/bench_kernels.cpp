// Serial reference vs OpenMP kernels on the default rig's record sizes.
#include "sheforge/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace sheforge;

namespace {

const std::vector<double> kAngles{0.1718, 0.3557, 0.6703, 1.0545};

std::vector<double> record(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = 10.0 * std::round(4.0 * std::sin(2e-3 * static_cast<double>(i)));
  return x;
}

void BM_staircase(benchmark::State &st, bool parallel) {
  std::vector<int> out(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    parallel ? kernels::staircase_levels(kAngles, 4000.0, 0, out)
             : kernels::staircase_levels_serial(kAngles, 4000.0, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_pd_spwm(benchmark::State &st, bool parallel) {
  const kernels::PdCarrierParams p{0.9, 4, 50.0, 5000.0, 2e5};
  std::vector<int> out(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    parallel ? kernels::pd_spwm_levels(p, 0, out) : kernels::pd_spwm_levels_serial(p, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_projection(benchmark::State &st, bool parallel) {
  const std::vector<double> x = record(40000);
  std::vector<double> c(static_cast<std::size_t>(st.range(0))), s(c.size());
  for (auto _ : st) {
    parallel ? kernels::harmonic_projection(x, 1.0 / 4000.0, c, s)
             : kernels::harmonic_projection_serial(x, 1.0 / 4000.0, c, s);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 40000);
}

} // namespace

BENCHMARK_CAPTURE(BM_staircase, serial, false)->Arg(40000)->Arg(200000);
BENCHMARK_CAPTURE(BM_staircase, openmp, true)->Arg(40000)->Arg(200000);
BENCHMARK_CAPTURE(BM_pd_spwm, serial, false)->Arg(40000)->Arg(200000);
BENCHMARK_CAPTURE(BM_pd_spwm, openmp, true)->Arg(40000)->Arg(200000);
BENCHMARK_CAPTURE(BM_projection, serial, false)->Arg(49)->Arg(200);
BENCHMARK_CAPTURE(BM_projection, openmp, true)->Arg(49)->Arg(200);

BENCHMARK_MAIN();
