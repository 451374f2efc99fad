// Command-line driver for the benchmark suite. Exit codes: 0 success,
// 2 configuration error, 3 I/O error, 4 failed --check condition or replay
// mismatch.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toa/experiment.hpp"
#include "toa/types.hpp"
#include "toa/version.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool check = false;
};

void add_override_flags(CLI::App& cmd, std::string& config_path, Overrides& ov,
                        bool with_check = true) {
  cmd.add_option("-c,--config", config_path, "JSON config file (defaults apply if omitted)");
  cmd.add_option("--seed", ov.seed, "Override the master seed");
  cmd.add_option("--trials", ov.trials, "Override the trial count per grid point");
  cmd.add_option("--out", ov.out_dir, "Override the output directory");
  cmd.add_option("--threads", ov.threads, "Worker threads (0 = hardware count)");
  if (with_check)
    cmd.add_flag("--check", ov.check, "Verify result orderings after the run");
}

toa::ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  toa::ExperimentConfig cfg;
  if (!path.empty()) cfg = toa::ExperimentConfig::load(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.trials) cfg.trials = *ov.trials;
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.threads) cfg.threads = *ov.threads;
  cfg.validate();
  return cfg;
}

int report_violations(const std::vector<std::string>& violations) {
  if (violations.empty()) {
    std::cout << "check passed\n";
    return 0;
  }
  for (const auto& v : violations) std::cerr << "check failed: " << v << '\n';
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interference-resilient time-of-arrival estimation benchmarks"};
  app.set_version_flag("--version", toa::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  CLI::App* coarse = app.add_subcommand(
      "coarse-bench", "Detection ROC sweep over the SNR/SIR grid");
  add_override_flags(*coarse, config_path, ov);

  CLI::App* fine = app.add_subcommand(
      "fine-bench", "Sub-sample timing error sweep over the SNR/SIR grid");
  add_override_flags(*fine, config_path, ov);

  CLI::App* resolv = app.add_subcommand(
      "resolvability", "Two-path separation success-rate sweep");
  add_override_flags(*resolv, config_path, ov);

  CLI::App* timing = app.add_subcommand(
      "timing", "Per-invocation fine-search wall-clock comparison");
  add_override_flags(*timing, config_path, ov);

  std::string cir_out = "scenario.json";
  CLI::App* synth = app.add_subcommand(
      "synth-cir", "Draw one calibrated trial scenario and write it as a CIR file");
  add_override_flags(*synth, config_path, ov, /*with_check=*/false);
  synth->add_option("--cir-out", cir_out, "Output CIR path");

  std::string run_dir, table = "coarse";
  int row = 0;
  CLI::App* replay = app.add_subcommand(
      "replay", "Re-execute one persisted trial and compare it byte-for-byte");
  replay->add_option("--run", run_dir, "Run directory containing manifest.json")
      ->required();
  replay->add_option("--table", table, "Trial table: coarse or fine")
      ->check(CLI::IsMember({"coarse", "fine"}));
  replay->add_option("--row", row, "Zero-based data row index")->required();
  replay->add_option("-c,--config", config_path,
                     "Config the run is expected to match (drift guard)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      std::optional<toa::ExperimentConfig> expected;
      if (!config_path.empty())
        expected = toa::ExperimentConfig::load(config_path);
      const bool ok = toa::replay_trial(run_dir, table, row,
                                        expected ? &*expected : nullptr, std::cout);
      return ok ? 0 : 4;
    }

    const toa::ExperimentConfig cfg = load_config(config_path, ov);
    if (coarse->parsed()) {
      toa::run_coarse_benchmark(cfg, std::cout);
      return ov.check ? report_violations(toa::check_coarse_results(cfg)) : 0;
    }
    if (fine->parsed()) {
      toa::run_fine_benchmark(cfg, std::cout);
      return ov.check ? report_violations(toa::check_fine_results(cfg)) : 0;
    }
    if (resolv->parsed()) {
      toa::run_resolvability(cfg, std::cout);
      return ov.check ? report_violations(toa::check_resolvability_results(cfg)) : 0;
    }
    if (timing->parsed()) {
      toa::run_timing(cfg, std::cout);
      return ov.check ? report_violations(toa::check_timing_results(cfg)) : 0;
    }
    if (synth->parsed()) {
      toa::run_synth_cir(cfg, cir_out, std::cout);
      return 0;
    }
  } catch (const toa::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const toa::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
