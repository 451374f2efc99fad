// Monte-Carlo benchmark driver: configuration, seeded trial execution over
// SNR/SIR grids, CSV persistence with a checksum manifest, and single-trial
// replay.
//
// Reproducibility contract: every trial's randomness derives from
// (master seed, benchmark tag, grid point index, trial index), results are
// collected into per-trial slots, and files are written by a sequential fold
// in grid-then-trial order. Output bytes are therefore identical for any
// worker thread count. Wall-clock measurements never enter result tables
// except through the explicitly non-deterministic `timing` benchmark.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "toa/channel.hpp"
#include "toa/glrt.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

namespace toa {

struct WaveformSettings {
  int seq_len = 63;
  int sync_root = 25;
  int intf_root = 29;
  double rolloff = 0.3;
  int span_symbols = 9;
  int oversampling = 2;
  int pad_samples = 8;
  double symbol_period = 1e-8;  // seconds

  SyncWaveform::Params sync_params() const;
};

struct ArraySettings {
  int rows = 8;
  int cols = 4;
  double carrier_hz = 15e9;
  double spacing_factor = 0.5;  // element pitch in wavelengths

  ArrayGeometry geometry() const;
};

// Synthetic trial generator parameters, or a CIR file that fixes the path
// layout (gains are still re-calibrated to each SNR/SIR grid point and noise
// is redrawn per trial).
struct ScenarioSettings {
  std::string cir_file;  // empty = synthetic trials
  int min_paths = 2;
  int max_paths = 6;
  double cone_half_angle_deg = 60.0;
  double excess_delay_mean_samples = 1.0;
  double gain_decay_samples = 2.0;
  std::int64_t true_window = 10;  // signal placed at this window index
  double bandwidth_hz = 2e8;
  double temperature_k = 298.15;
  double noise_figure_db = 3.0;

  double noise_variance() const;
};

struct EstimatorSettings {
  int rank_coarse = 4;
  int rank_fine = 16;
  int sub_intervals = 0;  // 0 = choose from SNR
  double gss_tolerance_samples = 1e-4;
  double derivative_step_samples = 1e-4;
  int max_windows = 32;
  double threshold_quantile = 0.999;  // detection threshold calibration
  int calibration_trials = 1000;
  double threshold_scale = 1.0;  // safety margin on the calibrated threshold

  EstimatorConfig estimator_config(const SyncWaveform& waveform, double snr_db) const;
};

struct ExperimentConfig {
  WaveformSettings waveform;
  ArraySettings array;
  ScenarioSettings scenario;
  EstimatorSettings estimator;
  std::vector<double> snr_db{30.0};
  std::vector<double> sir_db;  // +infinity = interference-free
  std::vector<int> coarse_ranks{1, 2, 4};
  std::vector<int> fine_ranks{4, 8, 16};
  std::vector<double> separations_samples;  // empty = per-SNR default grid
  int dense_points = 64;
  int trials = 200;
  std::uint64_t seed = 1;
  bool fine_end_to_end = false;
  bool tdnc_unsquared = false;

  // Runtime-only knobs, excluded from the canonical form and config hash so
  // reruns with different parallelism or output paths stay comparable.
  std::string out_dir = "results";
  int threads = 1;

  ExperimentConfig();  // fills the default SIR grid
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;  // canonical: runtime knobs excluded
  std::uint64_t hash() const;
  void validate() const;
};

// Default resolvability separation grid straddling the expected 10% and 90%
// crossings at the given SNR.
std::vector<double> default_separations(double snr_db);

// FNV-1a 64-bit, used for config hashes and file checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Benchmark entry points. Each writes its CSV tables plus manifest.json into
// config.out_dir, creating the directory if needed. I/O failures throw
// IoError; invalid configs throw std::invalid_argument.
void run_coarse_benchmark(const ExperimentConfig& config, std::ostream& log);
void run_fine_benchmark(const ExperimentConfig& config, std::ostream& log);
void run_resolvability(const ExperimentConfig& config, std::ostream& log);
void run_timing(const ExperimentConfig& config, std::ostream& log);

// Writes one calibrated synthetic scenario (first SNR/SIR grid point) in the
// CIR file format.
void run_synth_cir(const ExperimentConfig& config, const std::string& path,
                   std::ostream& log);

// Re-executes one persisted trial from the run directory's manifest and
// compares the regenerated table row byte-for-byte. `table` is "coarse" or
// "fine". Returns true on an exact match. If expected_config is non-null its
// hash must match the manifest's (config-drift guard, throws
// std::invalid_argument on mismatch).
bool replay_trial(const std::string& run_dir, const std::string& table, int row,
                  const ExperimentConfig* expected_config, std::ostream& log);

// Post-run acceptance checks used by the CLI --check flag; returns the list
// of violated conditions (empty = pass).
std::vector<std::string> check_coarse_results(const ExperimentConfig& config);
std::vector<std::string> check_fine_results(const ExperimentConfig& config);
std::vector<std::string> check_resolvability_results(const ExperimentConfig& config);
std::vector<std::string> check_timing_results(const ExperimentConfig& config);

}  // namespace toa
