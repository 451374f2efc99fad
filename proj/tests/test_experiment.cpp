#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toa/channel.hpp"
#include "toa/cir_io.hpp"
#include "toa/experiment.hpp"
#include "toa/parallel.hpp"
#include "toa/types.hpp"
#include "toa/waveform.hpp"

using namespace toa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fresh per-test scratch directory, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("experiment_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int data_rows(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int rows = -1;  // first line is the header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

std::string hex16(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Small grid so benchmark runs finish in milliseconds.
ExperimentConfig tiny_coarse_config(const std::string& out_dir) {
  ExperimentConfig c;
  c.snr_db = {30.0};
  c.sir_db = {-20.0};
  c.coarse_ranks = {1, 2};
  c.trials = 3;
  c.seed = 5;
  c.out_dir = out_dir;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("hash function matches published vectors and byte-wise folding") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);

  const std::string msg = "hello world";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : msg) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  CHECK(fnv1a64(msg.data(), msg.size()) == h);

  CHECK(fnv1a64("ab", 2) != fnv1a64("ba", 2));
}

TEST_CASE("double formatting round trips exactly and spells NaN") {
  const double values[] = {0.0,     1.0,   -1.5,    1.0 / 3.0, 0.1,
                           5e-9,    1e-300, -2.5e300, 4.0 * std::atan(1.0),
                           std::numeric_limits<double>::max(),
                           std::numeric_limits<double>::denorm_min(),
                           kInf,    -kInf};
  for (const double v : values) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("default separation grids are banded by SNR") {
  const std::vector<double> high{0.02, 0.05, 0.07, 0.09, 0.11, 0.14, 0.18};
  const std::vector<double> mid{0.06, 0.10, 0.14, 0.18, 0.22, 0.28};
  const std::vector<double> low{0.12, 0.18, 0.24, 0.30, 0.38, 0.46};
  CHECK(default_separations(30.0) == high);
  CHECK(default_separations(25.0) == high);
  CHECK(default_separations(24.9) == mid);
  CHECK(default_separations(20.0) == mid);
  CHECK(default_separations(15.0) == mid);
  CHECK(default_separations(10.0) == low);
  CHECK(default_separations(0.0) == low);
  for (const auto& grid : {high, mid, low}) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(grid[i] > 0.0);
      CHECK(grid[i] <= 2.0);
      if (i) CHECK(grid[i] > grid[i - 1]);
    }
  }
}

TEST_CASE("settings structs map onto the signal-processing types") {
  WaveformSettings ws;
  ws.sync_root = 29;
  ws.rolloff = 0.25;
  const SyncWaveform::Params p = ws.sync_params();
  CHECK(p.seq_len == 63);
  CHECK(p.root == 29);
  CHECK(p.rolloff == 0.25);
  CHECK(p.span_symbols == 9);
  CHECK(p.oversampling == 2);
  CHECK(p.pad_samples == 8);
  CHECK(p.symbol_period == 1e-8);

  ArraySettings as;
  const ArrayGeometry g = as.geometry();
  const ArrayGeometry want = ArrayGeometry::ura(8, 4, 15e9, 0.5);
  CHECK(g.rows == want.rows);
  CHECK(g.cols == want.cols);
  CHECK(g.wavelength == doctest::Approx(want.wavelength).epsilon(1e-15));
  CHECK(g.spacing == doctest::Approx(0.5 * 299792458.0 / 15e9).epsilon(1e-12));
  CHECK(g.carrier_hz() == doctest::Approx(15e9).epsilon(1e-12));

  ScenarioSettings sc;
  CHECK(sc.noise_variance() ==
        doctest::Approx(thermal_noise_variance(2e8, 298.15, 3.0)).epsilon(1e-15));
  CHECK(sc.noise_variance() ==
        doctest::Approx(1.380649e-23 * 2e8 * 298.15 * std::pow(10.0, 0.3))
            .epsilon(1e-12));

  const SyncWaveform wf(WaveformSettings{}.sync_params());
  EstimatorSettings es;
  EstimatorConfig ec = es.estimator_config(wf, 30.0);
  CHECK(ec.rank_coarse == 4);
  CHECK(ec.rank_fine == 16);
  CHECK(ec.sub_intervals == 13);  // auto-picked for high SNR
  CHECK(es.estimator_config(wf, 20.0).sub_intervals == 8);
  CHECK(es.estimator_config(wf, 10.0).sub_intervals == 5);
  es.sub_intervals = 9;
  CHECK(es.estimator_config(wf, 10.0).sub_intervals == 9);
  CHECK(ec.gss_tolerance == doctest::Approx(1e-4 * wf.sample_period()).epsilon(1e-15));
  CHECK(ec.derivative_step ==
        doctest::Approx(1e-4 * wf.sample_period()).epsilon(1e-15));
  CHECK(ec.max_windows == 32);
  CHECK(ec.coarse_threshold == 0.0);  // calibrated separately
  CHECK_NOTHROW(ec.validate(32));
}

TEST_CASE("default config fills the SIR grid and validates") {
  const ExperimentConfig c;
  REQUIRE(c.sir_db.size() == 6);
  CHECK(c.sir_db[0] == -20.0);
  CHECK(c.sir_db[1] == -10.0);
  CHECK(c.sir_db[2] == 0.0);
  CHECK(c.sir_db[3] == 10.0);
  CHECK(c.sir_db[4] == 20.0);
  CHECK(std::isinf(c.sir_db[5]));
  CHECK(c.sir_db[5] > 0.0);
  CHECK(c.snr_db == std::vector<double>{30.0});
  CHECK(c.coarse_ranks == std::vector<int>{1, 2, 4});
  CHECK(c.fine_ranks == std::vector<int>{4, 8, 16});
  CHECK(c.separations_samples.empty());
  CHECK(c.dense_points == 64);
  CHECK(c.trials == 200);
  CHECK(c.seed == 1);
  CHECK_FALSE(c.fine_end_to_end);
  CHECK_FALSE(c.tdnc_unsquared);
  CHECK(c.threads == 1);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config json round trip is canonical and excludes runtime knobs") {
  ExperimentConfig c;
  c.snr_db = {10.0, 20.0};
  c.sir_db = {-20.0, kInf};
  c.trials = 7;
  c.seed = 42;
  c.out_dir = "somewhere/else";
  c.threads = 8;

  const json j = c.to_json();
  CHECK_FALSE(j.contains("out_dir"));
  CHECK_FALSE(j.contains("threads"));
  REQUIRE(j.at("sir_db").size() == 2);
  CHECK(j.at("sir_db")[0].get<double>() == -20.0);
  CHECK(j.at("sir_db")[1].is_string());  // +inf has no JSON number form
  CHECK(j.at("sir_db")[1].get<std::string>() == "inf");

  const ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.trials == 7);
  CHECK(back.seed == 42);
  REQUIRE(back.sir_db.size() == 2);
  CHECK(std::isinf(back.sir_db[1]));
  CHECK(back.to_json() == j);
  CHECK(back.hash() == c.hash());

  // runtime knobs do not perturb the hash; grid changes do
  ExperimentConfig c2 = c;
  c2.out_dir = "third/place";
  c2.threads = 3;
  CHECK(c2.hash() == c.hash());
  ExperimentConfig c3 = c;
  c3.snr_db = {11.0, 20.0};
  CHECK(c3.hash() != c.hash());
  ExperimentConfig c4 = c;
  c4.seed = 43;
  CHECK(c4.hash() != c.hash());
}

TEST_CASE("config parser accepts the documented keys and rejects drift") {
  const json full = {
      {"waveform",
       {{"seq_len", 63}, {"sync_root", 25}, {"intf_root", 29}, {"rolloff", 0.3},
        {"span_symbols", 9}, {"oversampling", 2}, {"pad_samples", 8},
        {"symbol_period_s", 1e-8}}},
      {"array", {{"rows", 8}, {"cols", 4}, {"carrier_hz", 15e9}, {"spacing_factor", 0.5}}},
      {"scenario",
       {{"cir_file", ""}, {"min_paths", 2}, {"max_paths", 6},
        {"cone_half_angle_deg", 60.0}, {"excess_delay_mean_samples", 1.0},
        {"gain_decay_samples", 2.0}, {"true_window", 10}, {"bandwidth_hz", 2e8},
        {"temperature_k", 298.15}, {"noise_figure_db", 3.0}}},
      {"estimator",
       {{"rank_coarse", 4}, {"rank_fine", 16}, {"sub_intervals", 0},
        {"gss_tolerance_samples", 1e-4}, {"derivative_step_samples", 1e-4},
        {"max_windows", 32}, {"threshold_quantile", 0.999},
        {"calibration_trials", 1000}, {"threshold_scale", 1.0}}},
      {"snr_db", {30.0, 20.0}},
      {"sir_db", {-20.0, "inf"}},
      {"coarse_ranks", {1, 2, 4}},
      {"fine_ranks", {4, 8, 16}},
      {"separations_samples", {0.05, 0.1}},
      {"dense_points", 64},
      {"trials", 12},
      {"seed", 9},
      {"fine_end_to_end", false},
      {"tdnc_unsquared", true},
      {"out_dir", "runs/x"},
      {"threads", 2}};
  const ExperimentConfig c = ExperimentConfig::from_json(full);
  CHECK(c.waveform.seq_len == 63);
  CHECK(c.array.carrier_hz == 15e9);
  CHECK(c.scenario.true_window == 10);
  CHECK(c.estimator.calibration_trials == 1000);
  CHECK(c.snr_db == std::vector<double>{30.0, 20.0});
  REQUIRE(c.sir_db.size() == 2);
  CHECK(std::isinf(c.sir_db[1]));
  CHECK(c.trials == 12);
  CHECK(c.tdnc_unsquared);
  CHECK(c.out_dir == "runs/x");
  CHECK(c.threads == 2);

  // an empty document means "all defaults"
  CHECK_NOTHROW(ExperimentConfig::from_json(json::object()));

  const auto rejects = [](const json& doc) {
    CHECK_THROWS_AS(ExperimentConfig::from_json(doc), std::invalid_argument);
  };
  rejects(json{{"bogus_key", 1}});
  rejects(json{{"waveform", {{"seq_len", 63}, {"chip_rate", 1e6}}}});
  rejects(json{{"array", {{"rows", 8}, {"pitch_m", 0.01}}}});
  rejects(json{{"scenario", {{"true_window", 10}, {"rain_rate", 5}}}});
  rejects(json{{"estimator", {{"rank_fine", 16}, {"beam_count", 3}}}});
  rejects(json{{"waveform", json::array()}});
  rejects(json{{"trials", "many"}});
  rejects(json{{"trials", 2.5}});
  rejects(json{{"fine_end_to_end", 1}});
  rejects(json{{"seed", -1}});
  rejects(json{{"seed", 1.5}});
  rejects(json{{"snr_db", 30.0}});
  rejects(json{{"snr_db", {"high"}}});
  rejects(json{{"sir_db", {"-inf"}}});
  rejects(json{{"sir_db", {"quiet"}}});
  rejects(json{{"coarse_ranks", {1.5}}});
  rejects(json{{"out_dir", 7}});
}

TEST_CASE("config validation rejects out-of-range settings") {
  const auto broken = [](auto&& mutate) {
    ExperimentConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  broken([](ExperimentConfig& c) { c.array.rows = 1; c.array.cols = 2; });
  broken([](ExperimentConfig& c) { c.waveform.seq_len = 64; });
  broken([](ExperimentConfig& c) { c.waveform.rolloff = 0.0; });
  broken([](ExperimentConfig& c) { c.waveform.rolloff = 1.2; });
  broken([](ExperimentConfig& c) { c.scenario.min_paths = 0; });
  broken([](ExperimentConfig& c) { c.scenario.max_paths = 1; });
  broken([](ExperimentConfig& c) { c.scenario.true_window = 1; });
  broken([](ExperimentConfig& c) { c.scenario.cone_half_angle_deg = 91.0; });
  broken([](ExperimentConfig& c) { c.estimator.rank_coarse = 0; });
  broken([](ExperimentConfig& c) { c.estimator.rank_coarse = 17; });  // > rank_fine
  broken([](ExperimentConfig& c) { c.estimator.rank_fine = 31; });    // > antennas - 2
  broken([](ExperimentConfig& c) { c.estimator.sub_intervals = 1; });
  broken([](ExperimentConfig& c) { c.estimator.max_windows = 11; });  // true_window + 1
  broken([](ExperimentConfig& c) { c.estimator.threshold_quantile = 1.0; });
  broken([](ExperimentConfig& c) { c.estimator.calibration_trials = 9; });
  broken([](ExperimentConfig& c) { c.estimator.threshold_scale = 0.0; });
  broken([](ExperimentConfig& c) { c.snr_db.clear(); });
  broken([](ExperimentConfig& c) { c.snr_db = {kInf}; });
  broken([](ExperimentConfig& c) { c.sir_db = {std::nan("")}; });
  broken([](ExperimentConfig& c) { c.coarse_ranks = {0}; });
  broken([](ExperimentConfig& c) { c.fine_ranks = {31}; });
  broken([](ExperimentConfig& c) { c.separations_samples = {2.5}; });
  broken([](ExperimentConfig& c) { c.separations_samples = {-0.1}; });
  broken([](ExperimentConfig& c) { c.dense_points = 1; });
  broken([](ExperimentConfig& c) { c.trials = 0; });
  broken([](ExperimentConfig& c) { c.threads = -1; });
}

TEST_CASE("config loading distinguishes missing files from malformed ones") {
  TempDir tmp;
  CHECK_THROWS_AS(ExperimentConfig::load(tmp.file("absent.json")), IoError);

  write_text(tmp.file("broken.json"), "{ \"trials\": ");
  CHECK_THROWS_AS(ExperimentConfig::load(tmp.file("broken.json")), ParseError);

  write_text(tmp.file("good.json"), "{\"trials\": 7, \"seed\": 3}\n");
  const ExperimentConfig c = ExperimentConfig::load(tmp.file("good.json"));
  CHECK(c.trials == 7);
  CHECK(c.seed == 3);
}

TEST_CASE("parallel loop covers every index once and rethrows worker errors") {
  std::vector<int> slots(100, 0);
  parallel_for(100, 4, [&](std::int64_t i) { slots[i] += static_cast<int>(i) + 1; });
  for (int i = 0; i < 100; ++i) CHECK(slots[i] == i + 1);

  CHECK_THROWS_AS(parallel_for(50, 3,
                               [](std::int64_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  CHECK_THROWS_AS(parallel_for(5, 1,
                               [](std::int64_t i) {
                                 if (i == 2) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);

  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(7) == 7);
}

TEST_CASE("coarse benchmark writes deterministic tables with a checksummed manifest") {
  TempDir tmp;
  const std::string run1 = tmp.file("run1");
  const ExperimentConfig cfg = tiny_coarse_config(run1);
  std::ostringstream log;
  run_coarse_benchmark(cfg, log);

  REQUIRE(fs::exists(fs::path(run1) / "auc.csv"));
  REQUIRE(fs::exists(fs::path(run1) / "coarse_trials.csv"));
  REQUIRE(fs::exists(fs::path(run1) / "manifest.json"));
  CHECK(data_rows((fs::path(run1) / "auc.csv").string()) == 4);  // 2 ranks x 2 methods
  CHECK(data_rows((fs::path(run1) / "coarse_trials.csv").string()) ==
        9);  // 3 trials x (2 ranks + tdnc)

  const json manifest = json::parse(read_text((fs::path(run1) / "manifest.json").string()));
  CHECK(manifest.at("seed").get<std::uint64_t>() == 5);
  CHECK(manifest.at("config_hash").get<std::string>() == hex16(cfg.hash()));
  CHECK(ExperimentConfig::from_json(manifest.at("config")).hash() == cfg.hash());
  REQUIRE(manifest.at("files").size() == 2);
  for (const auto& f : manifest.at("files")) {
    const std::string bytes =
        read_text((fs::path(run1) / f.at("name").get<std::string>()).string());
    CHECK(f.at("bytes").get<std::uint64_t>() == bytes.size());
    CHECK(f.at("fnv1a64").get<std::string>() ==
          hex16(fnv1a64(bytes.data(), bytes.size())));
  }

  // every persisted row regenerates bit-exactly from its seed
  std::ostringstream replay_log;
  CHECK(replay_trial(run1, "coarse", 0, &cfg, replay_log));
  CHECK(replay_trial(run1, "coarse", 8, &cfg, replay_log));
  CHECK(replay_trial(run1, "coarse", 2, nullptr, replay_log));

  CHECK_THROWS_AS(replay_trial(run1, "coarse", 99, &cfg, replay_log),
                  std::invalid_argument);
  CHECK_THROWS_AS(replay_trial(run1, "sideways", 0, &cfg, replay_log),
                  std::invalid_argument);
  ExperimentConfig drifted = cfg;
  drifted.trials = 4;
  CHECK_THROWS_AS(replay_trial(run1, "coarse", 0, &drifted, replay_log),
                  std::invalid_argument);

  // rerun with more workers: identical bytes, manifest included
  const std::string run2 = tmp.file("run2");
  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = run2;
  cfg2.threads = 3;
  std::ostringstream log2;
  run_coarse_benchmark(cfg2, log2);
  for (const char* name : {"auc.csv", "coarse_trials.csv", "manifest.json"}) {
    CHECK(read_text((fs::path(run1) / name).string()) ==
          read_text((fs::path(run2) / name).string()));
  }
}

TEST_CASE("fine benchmark persists per-trial estimates that replay exactly") {
  TempDir tmp;
  const std::string run = tmp.file("fine");
  ExperimentConfig cfg;
  cfg.snr_db = {30.0};
  cfg.sir_db = {-20.0};
  cfg.fine_ranks = {4};
  cfg.trials = 3;
  cfg.seed = 11;
  cfg.out_dir = run;
  std::ostringstream log;
  run_fine_benchmark(cfg, log);

  for (const char* name : {"fine_median.csv", "fine_cdf.csv", "fine_trials.csv",
                           "manifest.json"})
    REQUIRE(fs::exists(fs::path(run) / name));
  CHECK(data_rows((fs::path(run) / "fine_trials.csv").string()) ==
        6);  // 3 trials x (glrt + fdnc)
  CHECK(data_rows((fs::path(run) / "fine_median.csv").string()) == 2);

  std::ostringstream replay_log;
  CHECK(replay_trial(run, "fine", 0, &cfg, replay_log));
  CHECK(replay_trial(run, "fine", 5, &cfg, replay_log));

  ExperimentConfig drifted = cfg;
  drifted.fine_ranks = {8};
  CHECK_THROWS_AS(replay_trial(run, "fine", 0, &drifted, replay_log),
                  std::invalid_argument);
}

TEST_CASE("resolvability run sweeps separations and summarizes crossings") {
  TempDir tmp;
  const std::string run = tmp.file("res");
  ExperimentConfig cfg;
  cfg.snr_db = {30.0};
  cfg.separations_samples = {0.05, 0.6};
  cfg.trials = 5;
  cfg.seed = 9;
  cfg.out_dir = run;
  std::ostringstream log;
  run_resolvability(cfg, log);

  REQUIRE(fs::exists(fs::path(run) / "resolvability.csv"));
  REQUIRE(fs::exists(fs::path(run) / "resolvability_summary.csv"));
  CHECK(data_rows((fs::path(run) / "resolvability.csv").string()) == 2);
  CHECK(data_rows((fs::path(run) / "resolvability_summary.csv").string()) == 1);

  // wide spacing must resolve at least as often as a twentieth of a sample
  std::ifstream in(fs::path(run) / "resolvability.csv");
  std::string line;
  std::getline(in, line);  // header
  double rate_narrow = -1.0, rate_wide = -1.0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 4);
    const double sep = std::strtod(fields[1].c_str(), nullptr);
    const double rate = std::strtod(fields[3].c_str(), nullptr);
    if (sep == 0.05) rate_narrow = rate;
    if (sep == 0.6) rate_wide = rate;
  }
  REQUIRE(rate_narrow >= 0.0);
  REQUIRE(rate_wide >= 0.0);
  CHECK(rate_wide >= rate_narrow);
  CHECK(rate_wide >= 0.8);
}

TEST_CASE("timing run reports both estimators and the expected ordering") {
  TempDir tmp;
  const std::string run = tmp.file("timing");
  ExperimentConfig cfg;
  cfg.snr_db = {30.0};
  cfg.sir_db = {-20.0};
  cfg.trials = 3;  // floored to 100 invocations internally
  cfg.seed = 2;
  cfg.out_dir = run;
  std::ostringstream log;
  run_timing(cfg, log);

  REQUIRE(fs::exists(fs::path(run) / "timing.csv"));
  CHECK(data_rows((fs::path(run) / "timing.csv").string()) == 2);
  const std::string text = read_text((fs::path(run) / "timing.csv").string());
  CHECK(text.find("glrt,100,") != std::string::npos);
  CHECK(text.find("fdnc,100,") != std::string::npos);
  // the projection-based search does strictly more algebra per call
  CHECK(check_timing_results(cfg).empty());
}

TEST_CASE("scenario synthesis writes a loadable calibrated channel file") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.seed = 21;
  const std::string path = tmp.file("scenario.json");
  std::ostringstream log;
  run_synth_cir(cfg, path, log);

  const MultipathScenario sc = load_cir(path);
  CHECK(sc.geometry.rows == 8);
  CHECK(sc.geometry.cols == 4);
  REQUIRE(!sc.sync_paths.empty());
  CHECK(sc.sync_paths.size() >= 2);
  CHECK(sc.sync_paths.size() <= 6);
  const double ts = 5e-9;
  CHECK(sc.sync_paths.front().delay >= 10.0 * ts);
  CHECK(sc.sync_paths.front().delay < 11.0 * ts);
  for (std::size_t i = 1; i < sc.sync_paths.size(); ++i)
    CHECK(sc.sync_paths[i].delay >= sc.sync_paths[i - 1].delay);
  CHECK(!sc.intf_paths.empty());

  // gains were calibrated to the first grid point (SNR 30 dB, SIR -20 dB)
  const SyncWaveform wf(cfg.waveform.sync_params());
  CHECK(measured_snr_db(sc, wf) == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(measured_sir_db(sc) == doctest::Approx(-20.0).epsilon(1e-9));
}

TEST_CASE("result checks flag ordering violations and pass clean tables") {
  TempDir tmp;

  SUBCASE("coarse AUC ordering") {
    ExperimentConfig cfg;
    cfg.snr_db = {30.0};
    cfg.sir_db = {-20.0};
    cfg.coarse_ranks = {1, 2};
    cfg.out_dir = tmp.path.string();
    const std::string header = "snr_db,sir_db,rank,method,trials,auc\n";

    write_text(tmp.file("auc.csv"),
               header + "30,-20,2,glrt,200,0.1\n30,-20,2,tdnc,200,0.3\n");
    CHECK(check_coarse_results(cfg).empty());

    write_text(tmp.file("auc.csv"),
               header + "30,-20,2,glrt,200,0.5\n30,-20,2,tdnc,200,0.3\n");
    CHECK(!check_coarse_results(cfg).empty());

    write_text(tmp.file("auc.csv"), header + "30,-20,2,glrt,200,0.1\n");
    CHECK(!check_coarse_results(cfg).empty());  // comparison row missing

    // an interference-free grid has nothing to compare
    ExperimentConfig quiet = cfg;
    quiet.sir_db = {kInf};
    write_text(tmp.file("auc.csv"), header);
    CHECK(check_coarse_results(quiet).empty());
  }

  SUBCASE("fine median ordering") {
    ExperimentConfig cfg;
    cfg.snr_db = {30.0};
    cfg.sir_db = {-20.0};
    cfg.fine_ranks = {4, 8};
    cfg.out_dir = tmp.path.string();
    const std::string header =
        "snr_db,sir_db,rank,method,trials,detect_rate,median_samples,mean_samples\n";

    write_text(tmp.file("fine_median.csv"),
               header + "30,-20,8,glrt,500,1,0.02,0.03\n30,-20,8,fdnc,500,1,0.05,0.06\n");
    CHECK(check_fine_results(cfg).empty());

    write_text(tmp.file("fine_median.csv"),
               header + "30,-20,8,glrt,500,1,0.07,0.08\n30,-20,8,fdnc,500,1,0.05,0.06\n");
    CHECK(!check_fine_results(cfg).empty());

    write_text(tmp.file("fine_median.csv"),
               header + "30,-20,8,glrt,500,1,0.02,0.03\n");
    CHECK(!check_fine_results(cfg).empty());
  }

  SUBCASE("resolvability crossing bands") {
    ExperimentConfig cfg;
    cfg.snr_db = {30.0};
    cfg.out_dir = tmp.path.string();
    const std::string header = "snr_db,d90_samples,d50_samples,d10_samples,j_max\n";

    write_text(tmp.file("resolvability_summary.csv"),
               header + "30,0.1,0.05,0.02,10\n25,9.9,9.9,9.9,1\n");
    CHECK(check_resolvability_results(cfg).empty());  // 25 dB has no band

    write_text(tmp.file("resolvability_summary.csv"), header + "30,0.3,0.1,0.05,5\n");
    CHECK(!check_resolvability_results(cfg).empty());

    write_text(tmp.file("resolvability_summary.csv"), header + "30,nan,nan,nan,nan\n");
    CHECK(!check_resolvability_results(cfg).empty());
  }

  SUBCASE("timing ordering") {
    ExperimentConfig cfg;
    cfg.out_dir = tmp.path.string();
    const std::string header = "method,invocations,mean_ns,std_ns,min_ns,max_ns\n";

    write_text(tmp.file("timing.csv"),
               header + "glrt,100,2e6,1e5,1e6,4e6\nfdnc,100,3e5,1e4,2e5,8e5\n");
    CHECK(check_timing_results(cfg).empty());

    write_text(tmp.file("timing.csv"),
               header + "glrt,100,2e5,1e4,1e5,4e5\nfdnc,100,3e6,1e5,2e6,8e6\n");
    CHECK(!check_timing_results(cfg).empty());

    write_text(tmp.file("timing.csv"), header + "glrt,100,2e6,1e5,1e6,4e6\n");
    CHECK(!check_timing_results(cfg).empty());
  }
}

}  // TEST_SUITE("experiment")
