// Synchronization waveform construction.
//
// The transmit signal is a Zadoff-Chu sequence shaped by a truncated
// root-raised-cosine pulse. Everything downstream needs two views of it:
// exact continuous-time samples at arbitrary (fractional) delays, and a
// frequency-domain template where a delay is a per-bin phase rotation of the
// zero-delay spectrum. Fractional delays are always evaluated from the
// continuous-time definition, never by interpolating a sampled vector.
#pragma once

#include <span>
#include <vector>

#include "toa/dft.hpp"
#include "toa/types.hpp"

namespace toa {

// Zadoff-Chu sequence of odd length with root coprime to the length:
// s[k] = exp(-j pi u k (k+1) / K). Entries have unit modulus and the
// periodic autocorrelation vanishes at every nonzero lag.
std::vector<cplx> zadoff_chu(int length, int root);

// Unit-energy root-raised-cosine impulse response centered at t = 0.
// The removable singularities at t = 0 and |t| = T/(4 beta) are evaluated
// from their analytic limits.
double rrc_eval(double t, double rolloff, double symbol_period);

// Causal truncated RRC: the prototype shifted by span/2 symbols so the
// support is [0, span * symbol_period], zero outside.
struct PulseShape {
  double rolloff = 0.3;
  int span_symbols = 9;
  double symbol_period = 1e-8;

  double eval(double t) const;
  double duration() const { return span_symbols * symbol_period; }
};

// Pulse-shaped sequence value at continuous time t:
// sum_k seq[k] * pulse(t - k * symbol_period).
cplx shaped_eval(std::span<const cplx> seq, const PulseShape& pulse, double t);

// Samples the shaped signal delayed by tau on the window grid:
// x[i] = x(i * sample_period - tau), i = 0 .. n-1.
// Splits a delay measured in samples into a whole-sample shift and a
// fractional remainder in [0, 1). Delays within 1e-9 samples of the integer
// grid snap onto it so rounding in the caller's arithmetic cannot flip the
// split.
void split_delay_samples(double delay_samples, long long& whole, double& frac);

// Direct samples of the pulse-shaped sequence at l*Ts - tau, by exact
// continuous-time evaluation.
VectorXcd sample_delayed(std::span<const cplx> seq, const PulseShape& pulse,
                         double tau, int n, double sample_period);

// Frequency-domain delay template. `freq` is the delayed spectrum,
// `unit` the unit-norm matched vector used by the detectors: correlating a
// window row against `unit` is the matched filter for a path at this delay,
// and rows proportional to a signal at the delay are exactly annihilated by
// I - unit * unit^H.
struct DelayTemplate {
  double tau = 0.0;
  VectorXcd freq;  // base spectrum rotated to delay tau
  VectorXcd unit;  // conj(freq) / ||freq||, unit Euclidean norm
};

// Builds the template from a precomputed zero-delay spectrum. Valid range of
// tau is [-sample_period, pad_samples * sample_period]: the upper bound keeps
// the circular shift inside the zero pad, the small negative guard exists so
// finite-difference probes straddling tau = 0 stay legal.
DelayTemplate freq_template(const VectorXcd& base_dft, double tau,
                            double sample_period, int pad_samples);

// The synchronization waveform with its precomputed templates.
//
// Construction samples the zero-delay signal once, transforms it with a
// unitary DFT, and caches both along with the time-domain matched template
// for the coarse detector. The object is immutable afterwards and safe to
// share across threads.
class SyncWaveform {
 public:
  struct Params {
    int seq_len = 63;         // Zadoff-Chu length, odd
    int root = 25;            // Zadoff-Chu root
    double rolloff = 0.3;     // RRC excess bandwidth
    int span_symbols = 9;     // RRC truncation
    int oversampling = 2;     // samples per symbol
    int pad_samples = 8;      // trailing zero pad of the window
    double symbol_period = 1e-8;
  };

  explicit SyncWaveform(const Params& params);

  const Params& params() const { return params_; }
  int window_len() const { return window_len_; }           // N
  double sample_period() const { return sample_period_; }  // T_s
  double symbol_period() const { return params_.symbol_period; }
  const PulseShape& pulse() const { return pulse_; }
  std::span<const cplx> sequence() const { return sequence_; }
  const UnitaryDft& dft() const { return dft_; }

  cplx value(double t) const;                 // continuous-time signal
  // Window samples of the signal delayed by tau. Whole-sample parts of the
  // delay shift the base window exactly (zero fill, no wrap); sub-sample
  // parts apply the band-limited DFT phase-ramp shift, so synthesized
  // windows agree with the frequency-domain delay templates at fractional
  // delays instead of carrying the truncated pulse's aliasing error.
  VectorXcd sample_delayed(double tau) const;

  const VectorXcd& base_time() const { return base_time_; }  // x at tau = 0
  const VectorXcd& base_dft() const { return base_dft_; }
  double base_energy() const { return base_energy_; }        // ||x||^2

  // Unit-norm matched template for the coarse stage (delay hypothesis 0):
  // conj(x) / ||x|| in the time domain.
  const VectorXcd& coarse_template() const { return coarse_template_; }

  DelayTemplate delay_template(double tau) const;

  // Hot-path variant of delay_template: writes only the unit matched vector,
  // reusing the caller's buffer to avoid allocation in search loops.
  void unit_template(double tau, VectorXcd& out) const;

 private:
  Params params_;
  PulseShape pulse_;
  std::vector<cplx> sequence_;
  int window_len_;
  double sample_period_;
  UnitaryDft dft_;
  VectorXcd base_time_;
  VectorXcd base_dft_;
  VectorXcd coarse_template_;
  double base_energy_;
  VectorXd ramp_rate_;        // per-bin delay rotation rate (rad/s)
  VectorXcd conj_base_unit_;  // conj(base_dft) / ||base_dft||
};

// Interfering transmitter: a Zadoff-Chu sequence repeated periodically,
// pulse-shaped, starting at a per-trial time offset so it occupies every
// observation window.
class PeriodicWaveform {
 public:
  PeriodicWaveform(std::vector<cplx> sequence, const PulseShape& pulse,
                   double offset);

  cplx value(double t) const;
  double period() const { return static_cast<double>(sequence_.size()) * pulse_.symbol_period; }

 private:
  std::vector<cplx> sequence_;
  PulseShape pulse_;
  double offset_;
};

}  // namespace toa
