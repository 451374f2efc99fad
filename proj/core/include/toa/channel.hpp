// Multi-antenna multipath channel synthesis.
//
// A scenario is a list of discrete propagation paths (delay, complex gain,
// arrival direction) for the synchronization transmitter and optionally an
// interfering one, observed by a uniform rectangular array in additive
// circularly-symmetric Gaussian noise. Windows of N consecutive samples are
// synthesized exactly from the continuous-time signal definitions; noise is
// keyed by absolute sample index and antenna so overlapping windows agree on
// their shared columns.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "toa/rng.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

namespace toa {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;

// Uniform rectangular array in the plane orthogonal to boresight (+x).
// Element (r, c) sits at y = (c - (cols-1)/2) d, z = (r - (rows-1)/2) d and
// maps to vector index r * cols + c.
struct ArrayGeometry {
  int rows = 8;
  int cols = 4;
  double spacing = 0.0;     // element pitch in meters
  double wavelength = 0.0;  // carrier wavelength in meters

  int size() const { return rows * cols; }
  double carrier_hz() const { return kSpeedOfLight / wavelength; }

  // Half-wavelength pitch for the given carrier unless overridden.
  static ArrayGeometry ura(int rows, int cols, double carrier_hz,
                           double spacing_factor = 0.5);
};

// Narrowband steering vector for azimuth/elevation in radians. Entry m is
// exp(j 2 pi / lambda * <p_m, d(az, el)>); boresight gives the all-ones
// vector.
VectorXcd ura_response(const ArrayGeometry& geometry, double azimuth, double elevation);

// One propagation path.
struct Mpc {
  double delay = 0.0;  // seconds, absolute
  cplx gain;
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians
};

struct MultipathScenario {
  ArrayGeometry geometry;
  std::vector<Mpc> sync_paths;  // sorted by delay, first entry is the ToA target
  std::vector<Mpc> intf_paths;  // sorted by delay, may be empty
  double noise_variance = 0.0;  // per-entry complex variance N0, watts
  std::uint64_t noise_seed = 0;

  // Checks invariants (positive noise power, non-empty sorted sync paths,
  // non-negative delays). Throws std::invalid_argument on violation.
  void validate() const;
};

// Thermal noise power kB * bandwidth * temperature * 10^(NF/10).
double thermal_noise_variance(double bandwidth_hz, double temperature_k,
                              double noise_figure_db);

// Returns a copy of the scenario with sync gains scaled so that the
// per-antenna first-path SNR |b1|^2 ||x||^2 / (N N0) matches target_snr_db,
// then interference gains scaled so total sync power over total interference
// power matches target_sir_db. A +infinity SIR zeroes the interference gains;
// a finite SIR with no interference paths is an error.
MultipathScenario calibrate_powers(const MultipathScenario& scenario,
                                   const SyncWaveform& waveform, double target_snr_db,
                                   double target_sir_db);

// Measurement counterparts used for verification.
double measured_snr_db(const MultipathScenario& scenario, const SyncWaveform& waveform);
double measured_sir_db(const MultipathScenario& scenario);

// N consecutive array samples starting at absolute sample `index`.
// Row = antenna, column = time.
struct ObservationWindow {
  std::int64_t index = 0;
  MatrixXcd samples;
};

// Synthesizes window `index` of the received signal: every path contributes
// gain * steering * x(t - delay) evaluated exactly at the sample instants,
// plus keyed Gaussian noise. `intf` may be null when all interference gains
// are zero or no interference paths exist.
ObservationWindow synth_window(const MultipathScenario& scenario,
                               const SyncWaveform& sync,
                               const PeriodicWaveform* intf, std::int64_t index);

// Consecutive windows [start, start + count).
std::vector<ObservationWindow> window_stream(const MultipathScenario& scenario,
                                             const SyncWaveform& sync,
                                             const PeriodicWaveform* intf,
                                             std::int64_t start, std::int64_t count);

// Random-access view of the window sequence for the detector loop.
class WindowStream {
 public:
  WindowStream(const MultipathScenario& scenario, const SyncWaveform& sync,
               const PeriodicWaveform* intf)
      : scenario_(&scenario), sync_(&sync), intf_(intf) {}

  ObservationWindow at(std::int64_t index) const {
    return synth_window(*scenario_, *sync_, intf_, index);
  }

 private:
  const MultipathScenario* scenario_;
  const SyncWaveform* sync_;
  const PeriodicWaveform* intf_;
};

// Distribution of random benchmark trials: path counts uniform on
// [min_paths, max_paths], arrival directions uniform in a cone around
// boresight, later-path excess delays exponential with the given mean and
// magnitudes decaying exponentially in excess delay.
struct TrialDrawParams {
  int min_paths = 2;
  int max_paths = 6;
  double cone_half_angle = kPi / 3.0;
  double excess_delay_mean = 0.0;  // seconds
  double gain_decay = 0.0;         // seconds
  double first_path_delay = 0.0;   // sync first-path absolute delay, seconds
  bool with_interference = true;
  double noise_variance = 0.0;
};

MultipathScenario draw_trial_scenario(RandomStream& rng, const ArrayGeometry& geometry,
                                      const TrialDrawParams& params);

}  // namespace toa
