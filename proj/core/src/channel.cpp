#include "toa/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace toa {

ArrayGeometry ArrayGeometry::ura(int rows, int cols, double carrier_hz,
                                 double spacing_factor) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("ArrayGeometry: rows and cols must be positive");
  if (!(carrier_hz > 0.0))
    throw std::invalid_argument("ArrayGeometry: carrier frequency must be positive");
  if (!(spacing_factor > 0.0))
    throw std::invalid_argument("ArrayGeometry: spacing factor must be positive");
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.wavelength = kSpeedOfLight / carrier_hz;
  g.spacing = spacing_factor * g.wavelength;
  return g;
}

VectorXcd ura_response(const ArrayGeometry& geometry, double azimuth, double elevation) {
  if (geometry.rows < 1 || geometry.cols < 1 || !(geometry.spacing > 0.0) ||
      !(geometry.wavelength > 0.0))
    throw std::invalid_argument("ura_response: geometry is not initialized");
  if (std::abs(elevation) > kPi / 2.0 + 1e-12)
    throw std::invalid_argument("ura_response: elevation outside [-pi/2, pi/2]");
  const double k = 2.0 * kPi / geometry.wavelength;
  // <p, d> with p in the y-z plane and d the unit arrival direction.
  const double ky = k * std::cos(elevation) * std::sin(azimuth);
  const double kz = k * std::sin(elevation);
  const double y0 = -0.5 * (geometry.cols - 1) * geometry.spacing;
  const double z0 = -0.5 * (geometry.rows - 1) * geometry.spacing;
  VectorXcd a(geometry.size());
  for (int r = 0; r < geometry.rows; ++r) {
    for (int c = 0; c < geometry.cols; ++c) {
      const double phase = ky * (y0 + c * geometry.spacing) + kz * (z0 + r * geometry.spacing);
      a(r * geometry.cols + c) = std::polar(1.0, phase);
    }
  }
  return a;
}

void MultipathScenario::validate() const {
  if (geometry.rows < 1 || geometry.cols < 1 || !(geometry.spacing > 0.0) ||
      !(geometry.wavelength > 0.0))
    throw std::invalid_argument("MultipathScenario: geometry is not initialized");
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("MultipathScenario: noise variance must be positive");
  if (sync_paths.empty())
    throw std::invalid_argument("MultipathScenario: at least one sync path is required");
  auto check_sorted = [](const std::vector<Mpc>& paths, const char* label) {
    double prev = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (paths[i].delay < 0.0)
        throw std::invalid_argument(std::string("MultipathScenario: negative delay in ") + label);
      if (i > 0 && paths[i].delay < prev)
        throw std::invalid_argument(std::string("MultipathScenario: ") + label +
                                    " not sorted by delay");
      prev = paths[i].delay;
    }
  };
  check_sorted(sync_paths, "sync paths");
  check_sorted(intf_paths, "interference paths");
}

double thermal_noise_variance(double bandwidth_hz, double temperature_k,
                              double noise_figure_db) {
  if (!(bandwidth_hz > 0.0))
    throw std::invalid_argument("thermal_noise_variance: bandwidth must be positive");
  if (!(temperature_k > 0.0))
    throw std::invalid_argument("thermal_noise_variance: temperature must be positive");
  return kBoltzmann * bandwidth_hz * temperature_k * std::pow(10.0, noise_figure_db / 10.0);
}

namespace {

double total_power(const std::vector<Mpc>& paths) {
  double p = 0.0;
  for (const Mpc& path : paths) p += std::norm(path.gain);
  return p;
}

}  // namespace

MultipathScenario calibrate_powers(const MultipathScenario& scenario,
                                   const SyncWaveform& waveform, double target_snr_db,
                                   double target_sir_db) {
  scenario.validate();
  if (std::isnan(target_snr_db) || std::isinf(target_snr_db))
    throw std::invalid_argument("calibrate_powers: SNR target must be finite");
  MultipathScenario out = scenario;

  const double first_gain = std::norm(out.sync_paths.front().gain);
  if (!(first_gain > 0.0))
    throw std::invalid_argument("calibrate_powers: first sync path has zero gain");
  const double snr_lin = std::pow(10.0, target_snr_db / 10.0);
  const double n = static_cast<double>(waveform.window_len());
  const double sync_scale = std::sqrt(
      snr_lin * n * out.noise_variance / (first_gain * waveform.base_energy()));
  for (Mpc& path : out.sync_paths) path.gain *= sync_scale;

  if (std::isinf(target_sir_db) && target_sir_db > 0.0) {
    for (Mpc& path : out.intf_paths) path.gain = cplx(0.0, 0.0);
    return out;
  }
  if (std::isnan(target_sir_db) || std::isinf(target_sir_db))
    throw std::invalid_argument("calibrate_powers: SIR target must be finite or +inf");

  const double intf_power = total_power(out.intf_paths);
  if (!(intf_power > 0.0))
    throw std::invalid_argument(
        "calibrate_powers: finite SIR requested but no interference power present");
  const double sir_lin = std::pow(10.0, target_sir_db / 10.0);
  const double intf_scale = std::sqrt(total_power(out.sync_paths) / (sir_lin * intf_power));
  for (Mpc& path : out.intf_paths) path.gain *= intf_scale;
  return out;
}

double measured_snr_db(const MultipathScenario& scenario, const SyncWaveform& waveform) {
  scenario.validate();
  const double snr = std::norm(scenario.sync_paths.front().gain) * waveform.base_energy() /
                     (static_cast<double>(waveform.window_len()) * scenario.noise_variance);
  return 10.0 * std::log10(snr);
}

double measured_sir_db(const MultipathScenario& scenario) {
  scenario.validate();
  const double intf_power = total_power(scenario.intf_paths);
  if (intf_power == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(total_power(scenario.sync_paths) / intf_power);
}

ObservationWindow synth_window(const MultipathScenario& scenario,
                               const SyncWaveform& sync,
                               const PeriodicWaveform* intf, std::int64_t index) {
  scenario.validate();
  if (index < 0) throw std::invalid_argument("synth_window: window index must be non-negative");
  const int m = scenario.geometry.size();
  const int n = sync.window_len();
  const double ts = sync.sample_period();

  ObservationWindow window;
  window.index = index;
  window.samples = MatrixXcd::Zero(m, n);

  VectorXcd x(n);
  for (const Mpc& path : scenario.sync_paths) {
    if (path.gain == cplx(0.0, 0.0)) continue;
    // Split the absolute delay once per path and slide the same delayed
    // vector under every window: window l's column i is stream sample
    // l + i, so consecutive windows share columns bit-exactly.
    long long whole = 0;
    double frac = 0.0;
    split_delay_samples(path.delay / ts, whole, frac);
    const VectorXcd home = sync.sample_delayed(frac * ts);
    const long long shift = whole - index;
    x.setZero();
    const long long lo = std::max<long long>(0, shift);
    const long long hi = std::min<long long>(n, shift + n);
    for (long long i = lo; i < hi; ++i)
      x(static_cast<Eigen::Index>(i)) = home(static_cast<Eigen::Index>(i - shift));
    const VectorXcd steer = ura_response(scenario.geometry, path.azimuth, path.elevation);
    window.samples.noalias() += (path.gain * steer) * x.transpose();
  }

  bool any_intf = false;
  for (const Mpc& path : scenario.intf_paths)
    if (path.gain != cplx(0.0, 0.0)) any_intf = true;
  if (any_intf) {
    if (intf == nullptr)
      throw std::invalid_argument(
          "synth_window: interference paths present but no interference waveform given");
    for (const Mpc& path : scenario.intf_paths) {
      if (path.gain == cplx(0.0, 0.0)) continue;
      for (int i = 0; i < n; ++i)
        x(i) = intf->value(static_cast<double>(index + i) * ts - path.delay);
      const VectorXcd steer = ura_response(scenario.geometry, path.azimuth, path.elevation);
      window.samples.noalias() += (path.gain * steer) * x.transpose();
    }
  }

  const double sigma = std::sqrt(scenario.noise_variance);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t sample = static_cast<std::uint64_t>(index + i);
    for (int a = 0; a < m; ++a)
      window.samples(a, i) +=
          sigma * noise_sample(scenario.noise_seed, sample, static_cast<std::uint32_t>(a));
  }
  return window;
}

std::vector<ObservationWindow> window_stream(const MultipathScenario& scenario,
                                             const SyncWaveform& sync,
                                             const PeriodicWaveform* intf,
                                             std::int64_t start, std::int64_t count) {
  if (start < 0 || count < 0)
    throw std::invalid_argument("window_stream: start and count must be non-negative");
  std::vector<ObservationWindow> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (std::int64_t l = start; l < start + count; ++l)
    windows.push_back(synth_window(scenario, sync, intf, l));
  return windows;
}

namespace {

std::vector<Mpc> draw_paths(RandomStream& rng, const TrialDrawParams& params,
                            double first_delay) {
  const int count = rng.uniform_int(params.min_paths, params.max_paths);
  std::vector<Mpc> paths(static_cast<std::size_t>(count));
  std::vector<double> excess(static_cast<std::size_t>(count), 0.0);
  for (int i = 1; i < count; ++i)
    excess[static_cast<std::size_t>(i)] = rng.exponential(params.excess_delay_mean);
  std::sort(excess.begin(), excess.end());
  for (int i = 0; i < count; ++i) {
    Mpc& path = paths[static_cast<std::size_t>(i)];
    path.delay = first_delay + excess[static_cast<std::size_t>(i)];
    path.gain = std::exp(-excess[static_cast<std::size_t>(i)] / params.gain_decay) *
                rng.unit_phasor();
    path.azimuth = rng.uniform(-params.cone_half_angle, params.cone_half_angle);
    path.elevation = rng.uniform(-params.cone_half_angle, params.cone_half_angle);
  }
  return paths;
}

}  // namespace

MultipathScenario draw_trial_scenario(RandomStream& rng, const ArrayGeometry& geometry,
                                      const TrialDrawParams& params) {
  if (params.min_paths < 1 || params.max_paths < params.min_paths)
    throw std::invalid_argument("draw_trial_scenario: invalid path count range");
  if (!(params.excess_delay_mean > 0.0) || !(params.gain_decay > 0.0))
    throw std::invalid_argument("draw_trial_scenario: delay spread parameters must be positive");
  if (!(params.noise_variance > 0.0))
    throw std::invalid_argument("draw_trial_scenario: noise variance must be positive");
  MultipathScenario scenario;
  scenario.geometry = geometry;
  scenario.noise_variance = params.noise_variance;
  scenario.sync_paths = draw_paths(rng, params, params.first_path_delay);
  if (params.with_interference) scenario.intf_paths = draw_paths(rng, params, 0.0);
  return scenario;
}

}  // namespace toa
