#include "toa/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace toa {

namespace {

constexpr double kEnergyFloor = 1e-300;

double window_energy(const MatrixXcd& y) {
  const double e = y.squaredNorm();
  if (e < kEnergyFloor) throw DegenerateInputError("window energy vanished");
  return e;
}

}  // namespace

double tdnc_score(const MatrixXcd& window_time, const SyncWaveform& waveform,
                  bool squared) {
  if (window_time.cols() != waveform.window_len())
    throw std::invalid_argument("window length does not match waveform");
  const double num = (window_time * waveform.base_time().conjugate()).squaredNorm();
  const double den = window_energy(window_time);
  return squared ? num / den : std::sqrt(num / den);
}

double fdnc_score(const MatrixXcd& window_freq, double tau,
                  const SyncWaveform& waveform) {
  if (window_freq.cols() != waveform.window_len())
    throw std::invalid_argument("window length does not match waveform");
  // The delayed spectrum is a unit phase ramp times the base spectrum, so its
  // norm is constant in tau: correlate against the cached unit template and
  // scale by the template energy instead of rebuilding conj(x~(tau)).
  VectorXcd u;
  waveform.unit_template(tau, u);
  const double num = waveform.base_energy() * (window_freq * u).squaredNorm();
  return num / window_energy(window_freq);
}

FineResult fdnc_fine_estimate(const MatrixXcd& window_freq,
                              const EstimatorConfig& config,
                              const SyncWaveform& waveform) {
  if (config.sub_intervals < 2)
    throw std::invalid_argument("sub_intervals must be >= 2");
  if (!(config.derivative_step > 0.0) || !(config.gss_tolerance > 0.0))
    throw std::invalid_argument("derivative_step and gss_tolerance must be positive");

  const ScoreFn objective = [&window_freq, &waveform](double tau) {
    return fdnc_score(window_freq, tau, waveform);
  };
  return fine_estimate_fn(objective, config.sub_intervals,
                          2.0 * waveform.sample_period(), config.derivative_step,
                          config.gss_tolerance);
}

}  // namespace toa
