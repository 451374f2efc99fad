// GLRT-style time-of-arrival scoring and the two-stage search built on it.
//
// For a delay hypothesis tau the window is tested for a rank-one component
// with the known signature at that delay, after adaptively cancelling up to
// `rank` interfering space-time directions. With u the unit matched template
// and Y the (frequency-domain) window:
//
//   Y_perp = Y (I - u u^H)             every trace of the hypothesized signal
//                                      removed; what remains is interference
//                                      plus noise
//   U      = leading `rank` left singular vectors of Y_perp
//   P      = I - U U^H                 spatial filter nulling the strongest
//                                      interference directions
//   score  = ||P Y u||^2 / ||P Y_perp||_F^2 * (M - rank)(N - 1)
//
// The numerator is the spatially filtered matched-filter energy, the
// denominator a residual-noise estimate whose normalization makes
// denominator / dof an estimate of the per-entry noise variance. Because the
// interference subspace is re-estimated at every tau, energy at any other
// delay (interferers, but also the signal's own later multipath) is nulled,
// which is what sharpens the score around the true delay well beyond the
// pulse autocorrelation width.
//
// The search runs in two stages: a coarse scan over integer windows with the
// zero-delay template, then a derivative-bracketed golden-section refinement
// of the fractional delay on the window preceding the detection.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "toa/channel.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

namespace toa {

struct ScoreBreakdown {
  double score = 0.0;
  double numerator = 0.0;    // ||P Y u||^2
  double denominator = 0.0;  // ||P Y (I - u u^H)||_F^2
  int dof = 0;               // (M - rank)(N - 1)
  double noise_var = 0.0;    // denominator / dof
};

// Search parameters. Delay-valued fields are in seconds; for_waveform fills
// the step and tolerance defaults of 1e-4 sample periods.
struct EstimatorConfig {
  int rank_coarse = 4;             // interference rank during detection
  int rank_fine = 16;              // interference rank during refinement
  double coarse_threshold = 0.0;   // detection threshold on the coarse score
  int sub_intervals = 13;          // J, bracketing grid over [0, 2 Ts]
  double gss_tolerance = 0.0;      // golden-section interval width target
  double derivative_step = 0.0;    // central-difference half-step
  int max_windows = 32;            // coarse scan budget

  static EstimatorConfig for_waveform(const SyncWaveform& waveform);
  void validate(int antennas) const;
};

// Bracketing grid density matched to the delay resolution observed at a
// given SNR (finer grids pay off only once peaks get narrow).
int default_sub_intervals(double snr_db);

// Y - (Y u) u^H for a unit-norm template u: removes the template direction
// from the row space of Y. Rows proportional to u^H are annihilated.
MatrixXcd apply_sync_complement(const MatrixXcd& y, const VectorXcd& unit_template);

// Leading left singular vectors of a wide matrix (columns >= rows),
// orthonormal, strongest first. Computed from the M x M Gram matrix, which
// is equivalent for left singular vectors and far cheaper than a full SVD
// when N >> M.
MatrixXcd interference_basis(const MatrixXcd& y_perp, int rank);

// Score of the frequency-domain window for delay hypothesis tau.
ScoreBreakdown glrt_score(const MatrixXcd& window_freq, double tau, int rank,
                          const SyncWaveform& waveform);

// Coarse-stage score of a time-domain window: identical pipeline with the
// fixed zero-delay template, no transform needed.
ScoreBreakdown coarse_score(const MatrixXcd& window_time, int rank,
                            const SyncWaveform& waveform);

struct CoarseDetection {
  std::optional<std::int64_t> index;  // first window whose score exceeds the threshold
  std::vector<double> trace;          // scores of all windows visited
};

CoarseDetection coarse_detect(const WindowStream& stream, const EstimatorConfig& config,
                              const SyncWaveform& waveform);

// Scalar objective used by the search helpers below.
using ScoreFn = std::function<double(double)>;

// (f(x+h) - f(x-h)) / 2h. The finite-difference form is the contract: tests
// and downstream consumers may rely on this exact stencil.
double central_difference(const ScoreFn& fn, double x, double step);

// Derivative of the GLRT score with respect to the delay hypothesis.
double score_derivative(const MatrixXcd& window_freq, double tau, int rank,
                        const SyncWaveform& waveform, double step);

struct Bracket {
  int index = 0;   // left endpoint index j
  double lo = 0.0; // j h
  double hi = 0.0; // (j+1) h
};

// Scans the endpoints tau_j = j * range / j_count, j = 0 .. j_count-1, and
// returns the first pair with derivative sign + -> -, i.e. the earliest
// sub-interval containing a local maximum.
std::optional<Bracket> bracket_first_max_fn(const ScoreFn& score, int j_count,
                                            double range, double step);

std::optional<Bracket> bracket_first_max(const MatrixXcd& window_freq,
                                         const EstimatorConfig& config,
                                         const SyncWaveform& waveform);

struct GssResult {
  double x = 0.0;
  int iterations = 0;
};

// Golden-section maximization over [lo, hi]; stops once the interval is
// narrower than tol (or after max_iter shrinks) and returns its midpoint.
GssResult golden_section(const ScoreFn& fn, double lo, double hi, double tol,
                         int max_iter = 100);

struct FineDiagnostics {
  int bracket_index = -1;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int score_evals = 0;     // objective evaluations, derivative probes included
  int gss_iterations = 0;
  double final_score = 0.0;
  bool low_score = false;  // final score at noise level, estimate untrustworthy
};

struct FineResult {
  double tau = 0.0;     // fractional delay in [0, range]
  bool found = false;   // false means no bracket; tau holds the fallback range/2
  FineDiagnostics diag;
};

// Generic bracket + golden-section refinement over [0, range] used by the
// GLRT and the correlation baselines alike.
FineResult fine_estimate_fn(const ScoreFn& score, int j_count, double range,
                            double step, double tol);

// GLRT refinement over [0, 2 Ts] of the given frequency-domain window.
FineResult fine_estimate(const MatrixXcd& window_freq, const EstimatorConfig& config,
                         const SyncWaveform& waveform);

struct ToaEstimate {
  bool detected = false;
  std::int64_t coarse_index = -1;      // detected window
  std::vector<double> coarse_trace;
  bool fine_ok = false;                // bracket found and refined
  double fine_offset = 0.0;            // tau' in [0, 2 Ts]
  double absolute_toa = 0.0;           // (coarse_index - 1) Ts + tau'
  FineDiagnostics fine;
  std::int64_t coarse_ns = 0;
  std::int64_t fine_ns = 0;
};

// Full two-stage estimate: coarse detection over the stream, refinement on
// the window before the detection. When the bracket fails the fallback
// offset of one sample period keeps the absolute estimate at the detected
// window boundary.
ToaEstimate estimate_toa(const WindowStream& stream, const EstimatorConfig& config,
                         const SyncWaveform& waveform);

}  // namespace toa
