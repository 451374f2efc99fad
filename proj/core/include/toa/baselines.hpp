// Normalized-correlation baselines the adaptive detector is compared against.
//
// Both score a window by matched-filter energy over total window energy,
// with no interference cancellation: TDNC in the time domain with the
// zero-delay template (coarse stage), FDNC in the frequency domain with the
// delay-hypothesis template (fine stage). FDNC refinement reuses the same
// bracket and golden-section machinery as the adaptive estimator so timing
// and accuracy comparisons isolate the scoring rule itself.
#pragma once

#include "toa/glrt.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

namespace toa {

// ||Y conj(x)||^2 / ||Y||_F^2 for the zero-delay time-domain template x.
// A window whose rows are all proportional to x^T scores ||x||^2, the
// maximum. `squared` selects the documented quadratic form; the unsquared
// variant ||Y conj(x)|| / ||Y||_F is kept for sensitivity checks.
double tdnc_score(const MatrixXcd& window_time, const SyncWaveform& waveform,
                  bool squared = true);

// ||Y~ conj(x~(tau))||^2 / ||Y~||_F^2 with x~(tau) the delayed spectrum.
// The denominator does not depend on tau, so the shape over tau is purely
// the matched-filter response.
double fdnc_score(const MatrixXcd& window_freq, double tau,
                  const SyncWaveform& waveform);

// Bracket + golden-section refinement of the FDNC score over [0, 2 Ts].
// Uses sub_intervals, derivative_step and gss_tolerance from the config;
// the rank fields are ignored. The low_score diagnostic stays false: the
// FDNC score has no calibrated noise floor.
FineResult fdnc_fine_estimate(const MatrixXcd& window_freq,
                              const EstimatorConfig& config,
                              const SyncWaveform& waveform);

}  // namespace toa
