#include "toa/waveform.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace toa {

namespace {

// Relative distance (in symbol periods) below which the RRC formula is
// replaced by its analytic limit. Direct evaluation loses ~eps/delta of
// precision approaching a removable singularity, so 1e-8 caps the error of
// either branch near 1e-8, far below every tolerance used downstream.
constexpr double kSingularGuard = 1e-8;

// The truncated pulse makes the shaped waveform jump at symbol boundaries,
// and the sample grid lands exactly on them (the sample period divides the
// symbol period). Snapping the evaluation time onto a boundary closer than
// this (in symbol periods) makes the chosen side of the jump independent of
// rounding in the caller's time arithmetic, so equal nominal times give
// bit-equal values. 1e-9 symbols is ~1e-17 s, far below any delay scale that
// matters downstream and far above accumulated double rounding.
constexpr double kBoundarySnap = 1e-9;

double snap_symbols(double s) {
  const double r = std::round(s);
  return std::abs(s - r) < kBoundarySnap ? r : s;
}

}  // namespace

std::vector<cplx> zadoff_chu(int length, int root) {
  if (length < 3 || length % 2 == 0)
    throw std::invalid_argument("zadoff_chu: length must be odd and >= 3");
  if (root < 1 || root >= length)
    throw std::invalid_argument("zadoff_chu: root must lie in [1, length)");
  if (std::gcd(root, length) != 1)
    throw std::invalid_argument("zadoff_chu: root must be coprime to length");
  std::vector<cplx> seq(static_cast<std::size_t>(length));
  const long long two_len = 2LL * length;
  for (int k = 0; k < length; ++k) {
    // Argument of exp(-j pi u k (k+1) / K), reduced mod 2K before the float
    // division so large k keep full phase precision.
    const long long num = (static_cast<long long>(root) * k % two_len) * (k + 1) % two_len;
    seq[static_cast<std::size_t>(k)] =
        std::polar(1.0, -kPi * static_cast<double>(num) / static_cast<double>(length));
  }
  return seq;
}

double rrc_eval(double t, double rolloff, double symbol_period) {
  if (!(rolloff > 0.0) || rolloff > 1.0)
    throw std::invalid_argument("rrc_eval: rolloff must lie in (0, 1]");
  if (!(symbol_period > 0.0))
    throw std::invalid_argument("rrc_eval: symbol period must be positive");
  const double x = t / symbol_period;  // time in symbols
  const double scale = 1.0 / std::sqrt(symbol_period);
  const double quarter = 1.0 / (4.0 * rolloff);

  if (std::abs(x) < kSingularGuard)
    return scale * (1.0 - rolloff + 4.0 * rolloff / kPi);

  if (std::abs(std::abs(x) - quarter) < kSingularGuard) {
    const double a = kPi / (4.0 * rolloff);
    return scale * (rolloff / std::sqrt(2.0)) *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }

  const double num =
      std::sin(kPi * x * (1.0 - rolloff)) + 4.0 * rolloff * x * std::cos(kPi * x * (1.0 + rolloff));
  const double den = kPi * x * (1.0 - 16.0 * rolloff * rolloff * x * x);
  return scale * num / den;
}

double PulseShape::eval(double t) const {
  if (t < 0.0 || t > duration()) return 0.0;
  const double value = rrc_eval(t - 0.5 * duration(), rolloff, symbol_period);
  // Truncation leaves a step at each support edge. Samples land exactly on
  // the edges (the sample grid divides the symbol grid), so take the jump
  // midpoint there: it is the value the band-limited interpolant used by the
  // frequency-domain templates passes through, keeping fractional-delay
  // templates consistent with direct time sampling. Off the exact edges the
  // convention contributes nothing.
  if (t == 0.0 || t == duration()) return 0.5 * value;
  return value;
}

cplx shaped_eval(std::span<const cplx> seq, const PulseShape& pulse, double t) {
  const double t_sym = pulse.symbol_period;
  // Work in symbol units so the pulse argument (s - k) is exact whenever s
  // snaps onto the boundary grid.
  const double s = snap_symbols(t / t_sym);
  const int last = static_cast<int>(seq.size()) - 1;
  // Only symbols whose pulse support covers t contribute.
  int k_lo = static_cast<int>(std::ceil(s - pulse.span_symbols));
  int k_hi = static_cast<int>(std::floor(s));
  if (k_lo < 0) k_lo = 0;
  if (k_hi > last) k_hi = last;
  cplx acc(0.0, 0.0);
  for (int k = k_lo; k <= k_hi; ++k)
    acc += seq[static_cast<std::size_t>(k)] * pulse.eval((s - k) * t_sym);
  return acc;
}

void split_delay_samples(double delay_samples, long long& whole, double& frac) {
  const double r = std::round(delay_samples);
  if (std::abs(delay_samples - r) < kBoundarySnap) {
    whole = static_cast<long long>(r);
    frac = 0.0;
    return;
  }
  const double fl = std::floor(delay_samples);
  whole = static_cast<long long>(fl);
  frac = delay_samples - fl;
}

VectorXcd sample_delayed(std::span<const cplx> seq, const PulseShape& pulse,
                         double tau, int n, double sample_period) {
  if (n < 1) throw std::invalid_argument("sample_delayed: window length must be positive");
  if (!(sample_period > 0.0))
    throw std::invalid_argument("sample_delayed: sample period must be positive");
  VectorXcd x(n);
  for (int i = 0; i < n; ++i)
    x(i) = shaped_eval(seq, pulse, static_cast<double>(i) * sample_period - tau);
  return x;
}

DelayTemplate freq_template(const VectorXcd& base_dft, double tau,
                            double sample_period, int pad_samples) {
  const int n = static_cast<int>(base_dft.size());
  if (n < 1) throw std::invalid_argument("freq_template: empty base spectrum");
  if (tau < -sample_period || tau > static_cast<double>(pad_samples) * sample_period)
    throw std::invalid_argument("freq_template: delay outside the wrap-free range");
  DelayTemplate tmpl;
  tmpl.tau = tau;
  tmpl.freq = base_dft.cwiseProduct(phase_ramp(tau, n, sample_period));
  tmpl.unit = tmpl.freq.conjugate() / tmpl.freq.norm();
  return tmpl;
}

SyncWaveform::SyncWaveform(const Params& params)
    : params_(params),
      pulse_{params.rolloff, params.span_symbols, params.symbol_period},
      sequence_(zadoff_chu(params.seq_len, params.root)),
      window_len_(params.oversampling * (params.seq_len + params.span_symbols - 1) +
                  params.pad_samples),
      sample_period_(params.symbol_period / params.oversampling),
      dft_(window_len_) {
  if (params.span_symbols < 1)
    throw std::invalid_argument("SyncWaveform: pulse span must be at least one symbol");
  if (params.oversampling < 1)
    throw std::invalid_argument("SyncWaveform: oversampling factor must be positive");
  if (params.pad_samples < 0)
    throw std::invalid_argument("SyncWaveform: pad length must be non-negative");
  if (!(params.symbol_period > 0.0))
    throw std::invalid_argument("SyncWaveform: symbol period must be positive");

  base_time_ = toa::sample_delayed(sequence_, pulse_, 0.0, window_len_, sample_period_);
  base_dft_ = dft_.forward(base_time_);
  base_energy_ = base_time_.squaredNorm();
  coarse_template_ = base_time_.conjugate() / std::sqrt(base_energy_);

  // Per-bin angular rate of the delay rotation, cached for the search loops.
  const std::vector<int> k = dft_indices(window_len_);
  ramp_rate_.resize(window_len_);
  conj_base_unit_.resize(window_len_);
  const double base_norm = std::sqrt(base_energy_);
  for (int m = 0; m < window_len_; ++m) {
    ramp_rate_(m) = 2.0 * kPi * static_cast<double>(k[static_cast<std::size_t>(m)]) /
                    (static_cast<double>(window_len_) * sample_period_);
    conj_base_unit_(m) = std::conj(base_dft_(m)) / base_norm;
  }
}

cplx SyncWaveform::value(double t) const { return shaped_eval(sequence_, pulse_, t); }

VectorXcd SyncWaveform::sample_delayed(double tau) const {
  long long whole = 0;
  double frac = 0.0;
  split_delay_samples(tau / sample_period_, whole, frac);

  const int n = window_len_;
  VectorXcd out = VectorXcd::Zero(n);
  if (whole >= n || whole <= -n) return out;

  // Sub-sample part of the delay: band-limited shift of the base window via
  // the DFT phase ramp, the same construction the delay templates use.
  VectorXcd home;
  const VectorXcd* src = &base_time_;
  if (frac != 0.0) {
    home = dft_.inverse(base_dft_.cwiseProduct(
        phase_ramp(frac * sample_period_, n, sample_period_)));
    src = &home;
  }
  // Whole-sample part: plain shift with zero fill (the stream before the
  // signal arrives and after it ends is silent, not a circular wrap).
  const long long lo = std::max<long long>(0, whole);
  const long long hi = std::min<long long>(n, whole + n);
  for (long long i = lo; i < hi; ++i)
    out(static_cast<Eigen::Index>(i)) = (*src)(static_cast<Eigen::Index>(i - whole));
  return out;
}

DelayTemplate SyncWaveform::delay_template(double tau) const {
  return freq_template(base_dft_, tau, sample_period_, params_.pad_samples);
}

void SyncWaveform::unit_template(double tau, VectorXcd& out) const {
  if (tau < -sample_period_ ||
      tau > static_cast<double>(params_.pad_samples) * sample_period_)
    throw std::invalid_argument("unit_template: delay outside the wrap-free range");
  out.resize(window_len_);
  // conj(base_dft . ramp(tau)) / ||base_dft||, expanded so each entry is one
  // polar rotation of the cached conjugate spectrum.
  for (int m = 0; m < window_len_; ++m)
    out(m) = conj_base_unit_(m) * std::polar(1.0, ramp_rate_(m) * tau);
}

PeriodicWaveform::PeriodicWaveform(std::vector<cplx> sequence, const PulseShape& pulse,
                                   double offset)
    : sequence_(std::move(sequence)), pulse_(pulse), offset_(offset) {
  if (sequence_.empty())
    throw std::invalid_argument("PeriodicWaveform: sequence must not be empty");
}

cplx PeriodicWaveform::value(double t) const {
  const double t_sym = pulse_.symbol_period;
  // Same symbol-unit evaluation as shaped_eval, without the sequence bounds.
  const double s = snap_symbols((t - offset_) / t_sym);
  const int len = static_cast<int>(sequence_.size());
  const long long k_lo = static_cast<long long>(std::ceil(s - pulse_.span_symbols));
  const long long k_hi = static_cast<long long>(std::floor(s));
  cplx acc(0.0, 0.0);
  for (long long k = k_lo; k <= k_hi; ++k) {
    const int idx = static_cast<int>(((k % len) + len) % len);
    acc += sequence_[static_cast<std::size_t>(idx)] *
           pulse_.eval((s - static_cast<double>(k)) * t_sym);
  }
  return acc;
}

}  // namespace toa
