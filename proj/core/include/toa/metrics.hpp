// Evaluation metrics: coarse-detection ROC/AUC, fine-stage error CDFs, and
// the two-path delay-resolvability study.
//
// AUC convention: the ROC is missed-detection rate versus false-alarm rate,
// so 0 is a perfect detector and 0.5 is chance.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "toa/channel.hpp"
#include "toa/glrt.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

namespace toa {

enum class CoarseOutcome { kCorrect, kFalseAlarm, kMiss };

// One coarse trial: the true signal window and the score of every scanned
// window (no early stopping, so the trial can be re-classified at any
// threshold). First-exceedance indices beyond the trace are misses, so the
// trace only needs to reach true_index + 1.
struct CoarseTrialRecord {
  std::int64_t true_index = 0;
  std::vector<double> trace;
};

// Detection is the first trace index whose score strictly exceeds the
// threshold, with one window of slack on each side: earlier than
// true_index - 1 is a false alarm, later than true_index + 1 (or never)
// a miss.
CoarseOutcome classify_coarse(const CoarseTrialRecord& trial, double threshold);

// Rates per threshold, thresholds ascending. False-alarm rate is
// non-increasing and miss rate non-decreasing in the threshold.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> false_alarm_rate;
  std::vector<double> miss_rate;
};

// Empirical ROC over the sorted union of all observed scores.
RocCurve roc_curve(std::span<const CoarseTrialRecord> trials);

// Trapezoidal area under miss rate vs false-alarm rate, curve extended to
// the (0,1) and (1,0) endpoints.
double auc(const RocCurve& curve);

struct ErrorCdf {
  std::vector<double> error;     // sorted ascending
  std::vector<double> fraction;  // (i+1)/n, right-continuous empirical CDF
  double mean = 0.0;
  double median = 0.0;
};

ErrorCdf error_cdf(std::vector<double> abs_errors);

// Number of positive-to-negative sign changes of the central-difference
// derivative of `fn` over sub_intervals+1 equispaced endpoints of
// [0, range]. Two changes means two distinct maxima: a resolved path pair.
int count_score_maxima(const ScoreFn& fn, double range, int sub_intervals,
                       double step);

struct ResolvabilityConfig {
  double snr_db = 30.0;
  int rank = 16;                            // fine-stage interference rank
  int trials = 1000;
  std::vector<double> separations_samples;  // two-path spacing grid
  std::uint64_t seed = 1;
  int threads = 1;
  int dense_sub_intervals = 64;             // derivative scan density
  double derivative_step_samples = 1e-4;
};

struct ResolvabilityPoint {
  double separation_samples = 0.0;
  double success_rate = 0.0;  // fraction of trials with exactly two maxima
};

// Monte-Carlo resolvability of two unit-gain paths arriving 90 degrees apart
// in azimuth and elevation, first-path offset uniform in [0.3, 0.7] samples,
// independent uniform gain phases per trial. Results sorted by separation.
std::vector<ResolvabilityPoint> resolvability_sweep(const ResolvabilityConfig& config,
                                                    const SyncWaveform& waveform,
                                                    const ArrayGeometry& geometry);

// Smallest separation at which the (assumed increasing) success rate reaches
// `rate`, linearly interpolated between grid points; NaN when never reached.
double separation_at_rate(std::span<const ResolvabilityPoint> points, double rate);

// Operational sub-interval budget implied by a resolvable separation: the
// smallest J whose sub-intervals of the two-sample fine range are no wider
// than twice the separation.
int bracket_budget(double separation_samples);

}  // namespace toa
