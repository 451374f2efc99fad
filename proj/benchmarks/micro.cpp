// Microbenchmarks for the hot paths: window synthesis, single score
// evaluations, and the two fine-search variants.
#include <benchmark/benchmark.h>

#include <optional>

#include "toa/baselines.hpp"
#include "toa/channel.hpp"
#include "toa/glrt.hpp"
#include "toa/rng.hpp"
#include "toa/waveform.hpp"

namespace {

using namespace toa;

struct Fixture {
  SyncWaveform wf{SyncWaveform::Params{}};
  MultipathScenario sc;
  std::optional<PeriodicWaveform> intf;
  ObservationWindow window;
  MatrixXcd window_freq;
  EstimatorConfig config;

  Fixture() {
    const ArrayGeometry geom = ArrayGeometry::ura(8, 4, 15e9, 0.5);
    RandomStream rng(derive_seed(1, 0xBE9C, 0));
    TrialDrawParams p;
    p.excess_delay_mean = wf.sample_period();
    p.gain_decay = 2.0 * wf.sample_period();
    p.first_path_delay = 10.4 * wf.sample_period();
    p.noise_variance = thermal_noise_variance(2e8, 298.15, 3.0);
    sc = draw_trial_scenario(rng, geom, p);
    sc.noise_seed = rng.next_u64();
    sc = calibrate_powers(sc, wf, 30.0, -20.0);
    PeriodicWaveform base(zadoff_chu(63, 29), wf.pulse(), 0.0);
    intf.emplace(zadoff_chu(63, 29), wf.pulse(), 0.3 * base.period());
    window = synth_window(sc, wf, &*intf, 9);
    window_freq = wf.dft().rows_forward(window.samples);
    config = EstimatorConfig::for_waveform(wf);
    config.sub_intervals = 13;
  }
};

const Fixture& fix() {
  static const Fixture f;
  return f;
}

void BM_SynthWindow(benchmark::State& state) {
  const Fixture& f = fix();
  for (auto _ : state) {
    ObservationWindow w = synth_window(f.sc, f.wf, &*f.intf, 9);
    benchmark::DoNotOptimize(w.samples.data());
  }
}
BENCHMARK(BM_SynthWindow);

void BM_CoarseScore(benchmark::State& state) {
  const Fixture& f = fix();
  const int rank = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const ScoreBreakdown s = coarse_score(f.window.samples, rank, f.wf);
    benchmark::DoNotOptimize(s.score);
  }
}
BENCHMARK(BM_CoarseScore)->Arg(1)->Arg(2)->Arg(4)->Arg(16);

void BM_GlrtScore(benchmark::State& state) {
  const Fixture& f = fix();
  const double tau = 0.7 * f.wf.sample_period();
  for (auto _ : state) {
    const ScoreBreakdown s = glrt_score(f.window_freq, tau, 16, f.wf);
    benchmark::DoNotOptimize(s.score);
  }
}
BENCHMARK(BM_GlrtScore);

void BM_FineEstimate(benchmark::State& state) {
  const Fixture& f = fix();
  for (auto _ : state) {
    const FineResult r = fine_estimate(f.window_freq, f.config, f.wf);
    benchmark::DoNotOptimize(r.tau);
  }
}
BENCHMARK(BM_FineEstimate);

void BM_FdncFineEstimate(benchmark::State& state) {
  const Fixture& f = fix();
  for (auto _ : state) {
    const FineResult r = fdnc_fine_estimate(f.window_freq, f.config, f.wf);
    benchmark::DoNotOptimize(r.tau);
  }
}
BENCHMARK(BM_FdncFineEstimate);

}  // namespace

BENCHMARK_MAIN();
