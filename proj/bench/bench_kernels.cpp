// Compares the OpenMP kernels against their serial reference twins on the
// shapes the pipeline actually produces. The references are the testing
// implementations, so any speedup shown here is over code with identical
// output (the projection pair matches bit for bit).

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isocal/calibrate.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/reference.hpp"
#include "isocal/rng.hpp"
#include "isocal/types.hpp"

using namespace isocal;

namespace {

// Noisy doubly-monotone-ish matrix: a smooth decreasing ramp in both
// directions plus uniform noise, the same shape the calibrators feed the
// projection.
std::vector<double> ramp_with_noise(int rows, int cols, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<double> m(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k)
      m[static_cast<size_t>(i) * cols + k] =
          1.0 - 0.5 * i / rows - 0.4 * k / cols + 0.3 * (g.uniform01() - 0.5);
  return m;
}

// Synthetic calibration inputs on a K-point grid with every observed time a
// grid member (the alignment dr_pseudo_outcomes requires).
struct DrFixture {
  TimeGrid grid;
  SurvivalDataset cal;
  RiskScores risks;
  SurvivalProbabilityGrid s_hat, g_hat;

  DrFixture(int n, int k) {
    grid.times.resize(k);
    for (int j = 0; j < k; ++j) grid.times[j] = (j + 1) * (8.0 / k);
    cal.p = 0;
    cal.id.resize(n);
    cal.time.resize(n);
    cal.event.resize(n);
    risks.value.resize(n);
    s_hat.role = GridRole::survival;
    g_hat.role = GridRole::censoring;
    s_hat.grid = g_hat.grid = grid;
    s_hat.probs.resize(static_cast<size_t>(n) * k);
    g_hat.probs.resize(static_cast<size_t>(n) * k);
    for (int i = 0; i < n; ++i) {
      SplitMix64 g = substream(99, i);
      cal.id[i] = "b" + std::to_string(i);
      cal.time[i] = grid.times[g.next() % k];
      cal.event[i] = g.uniform01() < 0.7;
      risks.value[i] = g.uniform01();
      const double rs = 0.1 + 0.4 * g.uniform01();
      const double rg = 0.05 + 0.2 * g.uniform01();
      for (int j = 0; j < k; ++j) {
        s_hat.probs[static_cast<size_t>(i) * k + j] =
            std::max(std::exp(-rs * grid.times[j]), 1e-12);
        g_hat.probs[static_cast<size_t>(i) * k + j] =
            std::max(std::exp(-rg * grid.times[j]), 1e-12);
      }
    }
    risks.id = cal.id;
    s_hat.subjects = g_hat.subjects = cal.id;
  }

  CalibrationInputs inputs() const {
    CalibrationInputs in;
    in.cal_data = &cal;
    in.cal_risks = &risks;
    in.s_hat = &s_hat;
    in.g_hat = &g_hat;
    in.grid = &grid;
    return in;
  }
};

void bm_project_omp(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  const auto base = ramp_with_noise(rows, cols, 7);
  DoublyMonotoneOptions opt;
  opt.tol = 1e-6 * std::sqrt(static_cast<double>(rows) * cols);
  int iters = 0;
  for (auto _ : state) {
    std::vector<double> m = base;
    iters = project_doubly_monotone(m, rows, cols, opt).iterations;
    benchmark::DoNotOptimize(m.data());
  }
  state.counters["sweeps"] = iters;
}

void bm_project_reference(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  const auto base = ramp_with_noise(rows, cols, 7);
  DoublyMonotoneOptions opt;
  opt.tol = 1e-6 * std::sqrt(static_cast<double>(rows) * cols);
  int iters = 0;
  for (auto _ : state) {
    std::vector<double> m = base;
    iters = reference::project_doubly_monotone(m, rows, cols, opt).iterations;
    benchmark::DoNotOptimize(m.data());
  }
  state.counters["sweeps"] = iters;
}

void bm_dr_prefix(benchmark::State& state) {
  const DrFixture fx(static_cast<int>(state.range(0)),
                     static_cast<int>(state.range(1)));
  const auto in = fx.inputs();
  for (auto _ : state) {
    auto m = dr_pseudo_outcomes(in);
    benchmark::DoNotOptimize(m.values.data());
  }
}

void bm_dr_literal(benchmark::State& state) {
  const DrFixture fx(static_cast<int>(state.range(0)),
                     static_cast<int>(state.range(1)));
  const auto in = fx.inputs();
  for (auto _ : state) {
    auto m = reference::dr_pseudo_outcomes(in);
    benchmark::DoNotOptimize(m.values.data());
  }
}

void bm_pava_sweep(benchmark::State& state) {
  // One projection sweep's worth of independent column fits.
  const int m = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  SplitMix64 g(3);
  std::vector<double> y(static_cast<size_t>(m) * cols);
  for (double& v : y) v = g.uniform01();
  std::vector<double> out(m);
  PavaWorkspace ws;
  for (auto _ : state) {
    for (int c = 0; c < cols; ++c) {
      pava_nonincreasing_run(y.data() + static_cast<size_t>(c) * m, nullptr, m,
                             out.data(), ws);
      benchmark::DoNotOptimize(out.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cols) * m);
}

BENCHMARK(bm_project_omp)
    ->Args({400, 300})
    ->Args({1200, 800})
    ->Args({2500, 2000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_project_reference)
    ->Args({400, 300})
    ->Args({1200, 800})
    ->Args({2500, 2000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_dr_prefix)
    ->Args({1000, 500})
    ->Args({2500, 2000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_dr_literal)
    ->Args({1000, 500})
    ->Args({2500, 2000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_pava_sweep)
    ->Args({2500, 500})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
