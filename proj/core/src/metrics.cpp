#include "toa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "toa/parallel.hpp"
#include "toa/rng.hpp"

namespace toa {

CoarseOutcome classify_coarse(const CoarseTrialRecord& trial, double threshold) {
  for (std::size_t l = 0; l < trial.trace.size(); ++l) {
    if (trial.trace[l] > threshold) {
      const auto idx = static_cast<std::int64_t>(l);
      if (idx < trial.true_index - 1) return CoarseOutcome::kFalseAlarm;
      if (idx > trial.true_index + 1) return CoarseOutcome::kMiss;
      return CoarseOutcome::kCorrect;
    }
  }
  return CoarseOutcome::kMiss;
}

RocCurve roc_curve(std::span<const CoarseTrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("need at least one trial");

  RocCurve curve;
  for (const auto& t : trials)
    curve.thresholds.insert(curve.thresholds.end(), t.trace.begin(), t.trace.end());
  std::sort(curve.thresholds.begin(), curve.thresholds.end());
  curve.thresholds.erase(std::unique(curve.thresholds.begin(), curve.thresholds.end()),
                         curve.thresholds.end());

  const double n = static_cast<double>(trials.size());
  curve.false_alarm_rate.reserve(curve.thresholds.size());
  curve.miss_rate.reserve(curve.thresholds.size());
  for (const double g : curve.thresholds) {
    int fa = 0, miss = 0;
    for (const auto& t : trials) {
      switch (classify_coarse(t, g)) {
        case CoarseOutcome::kFalseAlarm: ++fa; break;
        case CoarseOutcome::kMiss: ++miss; break;
        case CoarseOutcome::kCorrect: break;
      }
    }
    curve.false_alarm_rate.push_back(fa / n);
    curve.miss_rate.push_back(miss / n);
  }
  return curve;
}

double auc(const RocCurve& curve) {
  const std::size_t k = curve.thresholds.size();
  if (k == 0) throw std::invalid_argument("empty curve");
  if (curve.false_alarm_rate.size() != k || curve.miss_rate.size() != k)
    throw std::invalid_argument("curve field lengths differ");

  // Walk in threshold-descending order so false-alarm rate ascends, with the
  // (0,1) and (1,0) extensions at the ends.
  double area = 0.0;
  double fa_prev = 0.0, miss_prev = 1.0;
  for (std::size_t i = k; i-- > 0;) {
    const double fa = curve.false_alarm_rate[i];
    const double miss = curve.miss_rate[i];
    area += (fa - fa_prev) * 0.5 * (miss + miss_prev);
    fa_prev = fa;
    miss_prev = miss;
  }
  area += (1.0 - fa_prev) * 0.5 * (0.0 + miss_prev);
  return area;
}

ErrorCdf error_cdf(std::vector<double> abs_errors) {
  if (abs_errors.empty()) throw std::invalid_argument("need at least one sample");
  ErrorCdf out;
  std::sort(abs_errors.begin(), abs_errors.end());
  const std::size_t n = abs_errors.size();
  out.error = std::move(abs_errors);
  out.fraction.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.fraction[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  out.mean = std::accumulate(out.error.begin(), out.error.end(), 0.0) /
             static_cast<double>(n);
  out.median = (n % 2 == 1) ? out.error[n / 2]
                            : 0.5 * (out.error[n / 2 - 1] + out.error[n / 2]);
  return out;
}

int count_score_maxima(const ScoreFn& fn, double range, int sub_intervals,
                       double step) {
  if (sub_intervals < 2) throw std::invalid_argument("need at least 2 sub-intervals");
  if (!(range > 0.0)) throw std::invalid_argument("range must be positive");
  const double h = range / sub_intervals;
  int count = 0;
  double prev = central_difference(fn, 0.0, step);
  for (int j = 1; j <= sub_intervals; ++j) {
    const double cur = central_difference(fn, j * h, step);
    if (prev > 0.0 && cur < 0.0) ++count;
    prev = cur;
  }
  return count;
}

std::vector<ResolvabilityPoint> resolvability_sweep(const ResolvabilityConfig& config,
                                                    const SyncWaveform& waveform,
                                                    const ArrayGeometry& geometry) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (config.separations_samples.empty())
    throw std::invalid_argument("separation grid must be nonempty");

  const double ts = waveform.sample_period();
  const double snr_lin = std::pow(10.0, config.snr_db / 10.0);
  const double noise_var =
      waveform.base_energy() / (waveform.window_len() * snr_lin);
  const double step = config.derivative_step_samples * ts;
  const double range = 2.0 * ts;

  std::vector<double> separations = config.separations_samples;
  std::sort(separations.begin(), separations.end());

  std::vector<ResolvabilityPoint> out(separations.size());
  for (std::size_t p = 0; p < separations.size(); ++p) {
    const double sep = separations[p] * ts;
    std::vector<std::uint8_t> resolved(config.trials, 0);

    parallel_for(config.trials, config.threads, [&](std::int64_t t) {
      RandomStream rng(derive_seed(config.seed, static_cast<std::uint64_t>(p),
                                   static_cast<std::uint64_t>(t)));
      const double tau1 = (0.3 + 0.4 * rng.uniform()) * ts;

      MultipathScenario sc;
      sc.geometry = geometry;
      sc.noise_variance = noise_var;
      sc.sync_paths = {
          Mpc{tau1, rng.unit_phasor(), -kPi / 4.0, -kPi / 4.0},
          Mpc{tau1 + sep, rng.unit_phasor(), kPi / 4.0, kPi / 4.0},
      };
      sc.noise_seed = rng.next_u64();

      const ObservationWindow w = synth_window(sc, waveform, nullptr, 0);
      const MatrixXcd yf = waveform.dft().rows_forward(w.samples);
      const ScoreFn objective = [&](double tau) {
        return glrt_score(yf, tau, config.rank, waveform).score;
      };
      const int maxima =
          count_score_maxima(objective, range, config.dense_sub_intervals, step);
      resolved[t] = maxima == 2 ? 1 : 0;
    });

    const int hits = std::accumulate(resolved.begin(), resolved.end(), 0);
    out[p] = {separations[p], static_cast<double>(hits) / config.trials};
  }
  return out;
}

double separation_at_rate(std::span<const ResolvabilityPoint> points, double rate) {
  if (points.empty()) throw std::invalid_argument("empty sweep");
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("rate must be in (0,1)");

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].success_rate >= rate) {
      if (i == 0) return points[0].separation_samples;
      const auto& a = points[i - 1];
      const auto& b = points[i];
      const double span = b.success_rate - a.success_rate;
      if (span <= 0.0) return b.separation_samples;
      return a.separation_samples + (rate - a.success_rate) / span *
                                        (b.separation_samples - a.separation_samples);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int bracket_budget(double separation_samples) {
  if (!(separation_samples > 0.0))
    throw std::invalid_argument("separation must be positive");
  // Fine range spans 2 samples; keep sub-intervals no wider than twice the
  // resolvable separation: 2/J <= 2*sep.
  return static_cast<int>(std::ceil(1.0 / separation_samples));
}

}  // namespace toa
