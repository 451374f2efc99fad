#include "toa/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "toa/baselines.hpp"
#include "toa/cir_io.hpp"
#include "toa/metrics.hpp"
#include "toa/parallel.hpp"
#include "toa/rng.hpp"
#include "toa/version.hpp"

namespace toa {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Benchmark tags keep the seed streams of different subcommands and the
// threshold calibration disjoint.
constexpr std::uint64_t kTagCoarse = 0xC0A12E5;
constexpr std::uint64_t kTagFine = 0xF19E5;
constexpr std::uint64_t kTagResolvability = 0x9E501;
constexpr std::uint64_t kTagTiming = 0x7113;
constexpr std::uint64_t kTagCalibration = 0xCA11B;
constexpr std::uint64_t kTagSynth = 0x51C17;

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t tag, std::size_t point,
                         std::int64_t trial) {
  return derive_seed(derive_seed(master, tag, point), static_cast<std::uint64_t>(trial));
}

// ---------------------------------------------------------------------------
// JSON config parsing

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void reject_unknown(const json& j, const char* ctx,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(std::string(ctx) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      config_error(std::string("unknown field \"") + key + "\" in " + ctx);
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) config_error(std::string(key) + " must be a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) config_error(std::string(key) + " must be an integer");
  return v.get<int>();
}

std::int64_t get_int64(const json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) config_error(std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) config_error(std::string(key) + " must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& j, const char* key, std::string fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) config_error(std::string(key) + " must be a string");
  return v.get<std::string>();
}

double db_from_json(const json& v, const char* ctx) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    config_error(std::string(ctx) + ": only \"inf\" is accepted as a string value");
  }
  if (!v.is_number()) config_error(std::string(ctx) + " entries must be numbers or \"inf\"");
  return v.get<double>();
}

json db_to_json(double v) {
  if (std::isfinite(v)) return v;
  return "inf";
}

// ---------------------------------------------------------------------------
// CSV plumbing

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : path_(path) {
    out_.open(path, std::ios::binary);
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }

  void row(const std::string& line) { out_ << line << '\n'; }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("write failed for " + path_.string());
  }

  std::string name() const { return path_.filename().string(); }

 private:
  fs::path path_;
  std::ofstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::string> raw_rows;                // verbatim lines, for replay
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(delim, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  t.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.raw_rows.push_back(line);
    t.rows.push_back(split(line, ','));
  }
  return t;
}

int col(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end())
    throw std::invalid_argument("table has no column \"" + name + "\"");
  return static_cast<int>(it - t.header.begin());
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::invalid_argument("not a number: \"" + s + "\"");
  return v;
}

std::string join_doubles(std::span<const double> values, char delim) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += delim;
    out += format_double(values[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

std::uint64_t checksum_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksumming");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const ExperimentConfig& config, const fs::path& dir,
                    const std::vector<std::string>& files) {
  json m;
  m["version"] = kVersion;
  m["seed"] = config.seed;
  m["config_hash"] = hex64(config.hash());
  m["config"] = config.to_json();
  m["files"] = json::array();
  for (const auto& name : files) {
    const fs::path p = dir / name;
    json f;
    f["name"] = name;
    f["fnv1a64"] = hex64(checksum_file(p));
    f["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
    m["files"].push_back(f);
  }
  const fs::path path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << m.dump(2) << '\n';
  out.close();
  if (out.fail()) throw IoError("write failed for " + path.string());
}

json load_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Shared trial execution

struct BenchContext {
  const ExperimentConfig* cfg = nullptr;
  const SyncWaveform* wf = nullptr;
  ArrayGeometry geom;
  std::optional<MultipathScenario> base;  // from a CIR file, if configured
  std::vector<cplx> intf_seq;

  std::int64_t true_window(const MultipathScenario& sc) const {
    if (!base) return cfg->scenario.true_window;
    return static_cast<std::int64_t>(sc.sync_paths.front().delay / wf->sample_period());
  }
};

BenchContext make_context(const ExperimentConfig& cfg, const SyncWaveform& wf) {
  BenchContext ctx;
  ctx.cfg = &cfg;
  ctx.wf = &wf;
  ctx.geom = cfg.array.geometry();
  if (!cfg.scenario.cir_file.empty()) ctx.base = load_cir(cfg.scenario.cir_file);
  ctx.intf_seq = zadoff_chu(cfg.waveform.seq_len, cfg.waveform.intf_root);
  return ctx;
}

// Draws (or re-seeds) the trial scenario and calibrates it to the grid
// point. The rng consumption order is part of the reproducibility contract.
MultipathScenario make_trial_scenario(const BenchContext& ctx, RandomStream& rng,
                                      double snr_db, double sir_db) {
  MultipathScenario sc;
  if (ctx.base) {
    sc = *ctx.base;
    sc.noise_seed = rng.next_u64();
  } else {
    const auto& s = ctx.cfg->scenario;
    const double ts = ctx.wf->sample_period();
    TrialDrawParams p;
    p.min_paths = s.min_paths;
    p.max_paths = s.max_paths;
    p.cone_half_angle = s.cone_half_angle_deg * kPi / 180.0;
    p.excess_delay_mean = s.excess_delay_mean_samples * ts;
    p.gain_decay = s.gain_decay_samples * ts;
    p.first_path_delay = (static_cast<double>(s.true_window) + rng.uniform()) * ts;
    p.with_interference = std::isfinite(sir_db);
    p.noise_variance = s.noise_variance();
    sc = draw_trial_scenario(rng, ctx.geom, p);
    sc.noise_seed = rng.next_u64();
  }
  return calibrate_powers(sc, *ctx.wf, snr_db, sir_db);
}

bool has_live_interference(const MultipathScenario& sc) {
  for (const Mpc& p : sc.intf_paths)
    if (p.gain != cplx(0.0, 0.0)) return true;
  return false;
}

std::optional<PeriodicWaveform> make_interferer(const BenchContext& ctx,
                                                const MultipathScenario& sc,
                                                RandomStream& rng) {
  if (!has_live_interference(sc)) return std::nullopt;
  PeriodicWaveform pw(ctx.intf_seq, ctx.wf->pulse(), 0.0);
  const double offset = rng.uniform(0.0, pw.period());
  return PeriodicWaveform(ctx.intf_seq, ctx.wf->pulse(), offset);
}

struct CoarseTrialResult {
  std::int64_t true_window = 0;
  std::vector<std::vector<double>> glrt_traces;  // one per coarse rank
  std::vector<double> tdnc_trace;
};

CoarseTrialResult run_coarse_trial(const BenchContext& ctx, double snr_db,
                                   double sir_db, std::uint64_t seed) {
  const ExperimentConfig& cfg = *ctx.cfg;
  RandomStream rng(seed);
  const MultipathScenario sc = make_trial_scenario(ctx, rng, snr_db, sir_db);
  const auto intf = make_interferer(ctx, sc, rng);
  const PeriodicWaveform* pw = intf ? &*intf : nullptr;

  CoarseTrialResult out;
  out.true_window = ctx.true_window(sc);
  const std::int64_t last = out.true_window + 1;
  out.glrt_traces.resize(cfg.coarse_ranks.size());
  for (std::int64_t l = 0; l <= last; ++l) {
    const ObservationWindow w = synth_window(sc, *ctx.wf, pw, l);
    for (std::size_t r = 0; r < cfg.coarse_ranks.size(); ++r)
      out.glrt_traces[r].push_back(
          coarse_score(w.samples, cfg.coarse_ranks[r], *ctx.wf).score);
    out.tdnc_trace.push_back(tdnc_score(w.samples, *ctx.wf, !cfg.tdnc_unsquared));
  }
  return out;
}

struct FineTrialResult {
  double true_toa_samples = 0.0;
  std::vector<double> glrt_toa_samples;  // one per fine rank; NaN = no estimate
  std::vector<int> glrt_found;
  double fdnc_toa_samples = 0.0;
  int fdnc_found = 0;
};

// gamma: calibrated coarse threshold, used only in end-to-end mode.
FineTrialResult run_fine_trial(const BenchContext& ctx, double snr_db, double sir_db,
                               double gamma, std::uint64_t seed) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const SyncWaveform& wf = *ctx.wf;
  RandomStream rng(seed);
  const MultipathScenario sc = make_trial_scenario(ctx, rng, snr_db, sir_db);
  const auto intf = make_interferer(ctx, sc, rng);
  const PeriodicWaveform* pw = intf ? &*intf : nullptr;

  const double ts = wf.sample_period();
  FineTrialResult out;
  out.true_toa_samples = sc.sync_paths.front().delay / ts;
  const std::int64_t true_window = ctx.true_window(sc);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (cfg.fine_end_to_end) {
    WindowStream stream(sc, wf, pw);
    EstimatorConfig ec = cfg.estimator.estimator_config(wf, snr_db);
    ec.coarse_threshold = gamma;
    const CoarseDetection det = coarse_detect(stream, ec, wf);
    if (!det.index || *det.index == 0) {
      out.glrt_toa_samples.assign(cfg.fine_ranks.size(), nan);
      out.glrt_found.assign(cfg.fine_ranks.size(), 0);
      out.fdnc_toa_samples = nan;
      return out;
    }
    const ObservationWindow w = stream.at(*det.index - 1);
    const MatrixXcd yf = wf.dft().rows_forward(w.samples);
    const double base = static_cast<double>(*det.index - 1);
    for (const int rank : cfg.fine_ranks) {
      EstimatorConfig rc = ec;
      rc.rank_fine = rank;
      rc.rank_coarse = std::min(rc.rank_coarse, rank);
      const FineResult fr = fine_estimate(yf, rc, wf);
      out.glrt_toa_samples.push_back(base + fr.tau / ts);
      out.glrt_found.push_back(fr.found ? 1 : 0);
    }
    const FineResult fd = fdnc_fine_estimate(yf, ec, wf);
    out.fdnc_toa_samples = base + fd.tau / ts;
    out.fdnc_found = fd.found ? 1 : 0;
    return out;
  }

  // Isolation mode: the fine stage sees the window just before the true one,
  // as if the coarse stage had succeeded exactly.
  const ObservationWindow w = synth_window(sc, wf, pw, true_window - 1);
  const MatrixXcd yf = wf.dft().rows_forward(w.samples);
  const double base = static_cast<double>(true_window - 1);
  EstimatorConfig ec = cfg.estimator.estimator_config(wf, snr_db);
  for (const int rank : cfg.fine_ranks) {
    EstimatorConfig rc = ec;
    rc.rank_fine = rank;
    rc.rank_coarse = std::min(rc.rank_coarse, rank);
    const FineResult fr = fine_estimate(yf, rc, wf);
    out.glrt_toa_samples.push_back(base + fr.tau / ts);
    out.glrt_found.push_back(fr.found ? 1 : 0);
  }
  const FineResult fd = fdnc_fine_estimate(yf, ec, wf);
  out.fdnc_toa_samples = base + fd.tau / ts;
  out.fdnc_found = fd.found ? 1 : 0;
  return out;
}

// Detection-threshold calibration: the chosen quantile of coarse scores on
// signal-free windows (interference and noise only), per rank, scaled by the
// configured safety factor.
std::vector<double> calibrate_thresholds(const BenchContext& ctx, double snr_db,
                                         double sir_db, std::size_t point,
                                         std::span<const int> ranks) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const int n = cfg.estimator.calibration_trials;
  std::vector<std::vector<double>> scores(ranks.size(),
                                          std::vector<double>(n, 0.0));

  parallel_for(n, cfg.threads, [&](std::int64_t c) {
    RandomStream rng(trial_seed(cfg.seed, kTagCalibration, point, c));
    MultipathScenario sc = make_trial_scenario(ctx, rng, snr_db, sir_db);
    const auto intf = make_interferer(ctx, sc, rng);
    for (Mpc& p : sc.sync_paths) p.gain = cplx(0.0, 0.0);
    const ObservationWindow w =
        synth_window(sc, *ctx.wf, intf ? &*intf : nullptr, 0);
    for (std::size_t r = 0; r < ranks.size(); ++r)
      scores[r][c] = coarse_score(w.samples, ranks[r], *ctx.wf).score;
  });

  std::vector<double> gammas(ranks.size());
  auto idx = static_cast<std::size_t>(
      std::ceil(cfg.estimator.threshold_quantile * n));
  idx = std::clamp<std::size_t>(idx, 1, n) - 1;
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    std::sort(scores[r].begin(), scores[r].end());
    gammas[r] = scores[r][idx] * cfg.estimator.threshold_scale;
  }
  return gammas;
}

// Row builders shared by the benchmarks and replay so comparisons are exact.
std::string coarse_row(double snr, double sir, int rank, const std::string& method,
                       std::int64_t trial, std::uint64_t seed, std::int64_t true_window,
                       std::span<const double> trace) {
  std::string out = format_double(snr);
  out += ',';
  out += format_double(sir);
  out += ',';
  out += std::to_string(rank);
  out += ',';
  out += method;
  out += ',';
  out += std::to_string(trial);
  out += ',';
  out += std::to_string(seed);
  out += ',';
  out += std::to_string(true_window);
  out += ',';
  out += join_doubles(trace, ';');
  return out;
}

std::string fine_row(double snr, double sir, int rank, const std::string& method,
                     std::int64_t trial, std::uint64_t seed, double true_toa,
                     double toa, int found) {
  std::string out = format_double(snr);
  out += ',';
  out += format_double(sir);
  out += ',';
  out += std::to_string(rank);
  out += ',';
  out += method;
  out += ',';
  out += std::to_string(trial);
  out += ',';
  out += std::to_string(seed);
  out += ',';
  out += format_double(true_toa);
  out += ',';
  out += format_double(toa);
  out += ',';
  out += std::to_string(found);
  return out;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::size_t grid_index(const ExperimentConfig& cfg, double snr, double sir) {
  const auto si = std::find(cfg.snr_db.begin(), cfg.snr_db.end(), snr);
  if (si == cfg.snr_db.end()) throw std::invalid_argument("snr not in config grid");
  const auto qi = std::find(cfg.sir_db.begin(), cfg.sir_db.end(), sir);
  if (qi == cfg.sir_db.end()) throw std::invalid_argument("sir not in config grid");
  return static_cast<std::size_t>(si - cfg.snr_db.begin()) * cfg.sir_db.size() +
         static_cast<std::size_t>(qi - cfg.sir_db.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Settings

SyncWaveform::Params WaveformSettings::sync_params() const {
  SyncWaveform::Params p;
  p.seq_len = seq_len;
  p.root = sync_root;
  p.rolloff = rolloff;
  p.span_symbols = span_symbols;
  p.oversampling = oversampling;
  p.pad_samples = pad_samples;
  p.symbol_period = symbol_period;
  return p;
}

ArrayGeometry ArraySettings::geometry() const {
  return ArrayGeometry::ura(rows, cols, carrier_hz, spacing_factor);
}

double ScenarioSettings::noise_variance() const {
  return thermal_noise_variance(bandwidth_hz, temperature_k, noise_figure_db);
}

EstimatorConfig EstimatorSettings::estimator_config(const SyncWaveform& waveform,
                                                    double snr_db) const {
  EstimatorConfig c;
  c.rank_coarse = rank_coarse;
  c.rank_fine = rank_fine;
  c.sub_intervals = sub_intervals > 0 ? sub_intervals : default_sub_intervals(snr_db);
  c.gss_tolerance = gss_tolerance_samples * waveform.sample_period();
  c.derivative_step = derivative_step_samples * waveform.sample_period();
  c.max_windows = max_windows;
  return c;
}

ExperimentConfig::ExperimentConfig()
    : sir_db{-20.0, -10.0, 0.0, 10.0, 20.0,
             std::numeric_limits<double>::infinity()} {}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j, "config",
                 {"waveform", "array", "scenario", "estimator", "snr_db", "sir_db",
                  "coarse_ranks", "fine_ranks", "separations_samples", "dense_points",
                  "trials", "seed", "fine_end_to_end", "tdnc_unsquared", "out_dir",
                  "threads"});
  ExperimentConfig c;

  if (j.contains("waveform")) {
    const json& w = j.at("waveform");
    reject_unknown(w, "waveform",
                   {"seq_len", "sync_root", "intf_root", "rolloff", "span_symbols",
                    "oversampling", "pad_samples", "symbol_period_s"});
    c.waveform.seq_len = get_int(w, "seq_len", c.waveform.seq_len);
    c.waveform.sync_root = get_int(w, "sync_root", c.waveform.sync_root);
    c.waveform.intf_root = get_int(w, "intf_root", c.waveform.intf_root);
    c.waveform.rolloff = get_num(w, "rolloff", c.waveform.rolloff);
    c.waveform.span_symbols = get_int(w, "span_symbols", c.waveform.span_symbols);
    c.waveform.oversampling = get_int(w, "oversampling", c.waveform.oversampling);
    c.waveform.pad_samples = get_int(w, "pad_samples", c.waveform.pad_samples);
    c.waveform.symbol_period = get_num(w, "symbol_period_s", c.waveform.symbol_period);
  }
  if (j.contains("array")) {
    const json& a = j.at("array");
    reject_unknown(a, "array", {"rows", "cols", "carrier_hz", "spacing_factor"});
    c.array.rows = get_int(a, "rows", c.array.rows);
    c.array.cols = get_int(a, "cols", c.array.cols);
    c.array.carrier_hz = get_num(a, "carrier_hz", c.array.carrier_hz);
    c.array.spacing_factor = get_num(a, "spacing_factor", c.array.spacing_factor);
  }
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    reject_unknown(s, "scenario",
                   {"cir_file", "min_paths", "max_paths", "cone_half_angle_deg",
                    "excess_delay_mean_samples", "gain_decay_samples", "true_window",
                    "bandwidth_hz", "temperature_k", "noise_figure_db"});
    c.scenario.cir_file = get_str(s, "cir_file", c.scenario.cir_file);
    c.scenario.min_paths = get_int(s, "min_paths", c.scenario.min_paths);
    c.scenario.max_paths = get_int(s, "max_paths", c.scenario.max_paths);
    c.scenario.cone_half_angle_deg =
        get_num(s, "cone_half_angle_deg", c.scenario.cone_half_angle_deg);
    c.scenario.excess_delay_mean_samples =
        get_num(s, "excess_delay_mean_samples", c.scenario.excess_delay_mean_samples);
    c.scenario.gain_decay_samples =
        get_num(s, "gain_decay_samples", c.scenario.gain_decay_samples);
    c.scenario.true_window = get_int64(s, "true_window", c.scenario.true_window);
    c.scenario.bandwidth_hz = get_num(s, "bandwidth_hz", c.scenario.bandwidth_hz);
    c.scenario.temperature_k = get_num(s, "temperature_k", c.scenario.temperature_k);
    c.scenario.noise_figure_db =
        get_num(s, "noise_figure_db", c.scenario.noise_figure_db);
  }
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    reject_unknown(e, "estimator",
                   {"rank_coarse", "rank_fine", "sub_intervals", "gss_tolerance_samples",
                    "derivative_step_samples", "max_windows", "threshold_quantile",
                    "calibration_trials", "threshold_scale"});
    c.estimator.rank_coarse = get_int(e, "rank_coarse", c.estimator.rank_coarse);
    c.estimator.rank_fine = get_int(e, "rank_fine", c.estimator.rank_fine);
    c.estimator.sub_intervals = get_int(e, "sub_intervals", c.estimator.sub_intervals);
    c.estimator.gss_tolerance_samples =
        get_num(e, "gss_tolerance_samples", c.estimator.gss_tolerance_samples);
    c.estimator.derivative_step_samples =
        get_num(e, "derivative_step_samples", c.estimator.derivative_step_samples);
    c.estimator.max_windows = get_int(e, "max_windows", c.estimator.max_windows);
    c.estimator.threshold_quantile =
        get_num(e, "threshold_quantile", c.estimator.threshold_quantile);
    c.estimator.calibration_trials =
        get_int(e, "calibration_trials", c.estimator.calibration_trials);
    c.estimator.threshold_scale =
        get_num(e, "threshold_scale", c.estimator.threshold_scale);
  }
  if (j.contains("snr_db")) {
    const json& v = j.at("snr_db");
    if (!v.is_array()) config_error("snr_db must be an array");
    c.snr_db.clear();
    for (const auto& e : v) {
      if (!e.is_number()) config_error("snr_db entries must be numbers");
      c.snr_db.push_back(e.get<double>());
    }
  }
  if (j.contains("sir_db")) {
    const json& v = j.at("sir_db");
    if (!v.is_array()) config_error("sir_db must be an array");
    c.sir_db.clear();
    for (const auto& e : v) c.sir_db.push_back(db_from_json(e, "sir_db"));
  }
  if (j.contains("coarse_ranks")) {
    const json& v = j.at("coarse_ranks");
    if (!v.is_array()) config_error("coarse_ranks must be an array");
    c.coarse_ranks.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) config_error("coarse_ranks entries must be integers");
      c.coarse_ranks.push_back(e.get<int>());
    }
  }
  if (j.contains("fine_ranks")) {
    const json& v = j.at("fine_ranks");
    if (!v.is_array()) config_error("fine_ranks must be an array");
    c.fine_ranks.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) config_error("fine_ranks entries must be integers");
      c.fine_ranks.push_back(e.get<int>());
    }
  }
  if (j.contains("separations_samples")) {
    const json& v = j.at("separations_samples");
    if (!v.is_array()) config_error("separations_samples must be an array");
    c.separations_samples.clear();
    for (const auto& e : v) {
      if (!e.is_number()) config_error("separations_samples entries must be numbers");
      c.separations_samples.push_back(e.get<double>());
    }
  }
  c.dense_points = get_int(j, "dense_points", c.dense_points);
  c.trials = get_int(j, "trials", c.trials);
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
      config_error("seed must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  c.fine_end_to_end = get_bool(j, "fine_end_to_end", c.fine_end_to_end);
  c.tdnc_unsquared = get_bool(j, "tdnc_unsquared", c.tdnc_unsquared);
  c.out_dir = get_str(j, "out_dir", c.out_dir);
  c.threads = get_int(j, "threads", c.threads);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["waveform"] = {{"seq_len", waveform.seq_len},
                   {"sync_root", waveform.sync_root},
                   {"intf_root", waveform.intf_root},
                   {"rolloff", waveform.rolloff},
                   {"span_symbols", waveform.span_symbols},
                   {"oversampling", waveform.oversampling},
                   {"pad_samples", waveform.pad_samples},
                   {"symbol_period_s", waveform.symbol_period}};
  j["array"] = {{"rows", array.rows},
                {"cols", array.cols},
                {"carrier_hz", array.carrier_hz},
                {"spacing_factor", array.spacing_factor}};
  j["scenario"] = {{"cir_file", scenario.cir_file},
                   {"min_paths", scenario.min_paths},
                   {"max_paths", scenario.max_paths},
                   {"cone_half_angle_deg", scenario.cone_half_angle_deg},
                   {"excess_delay_mean_samples", scenario.excess_delay_mean_samples},
                   {"gain_decay_samples", scenario.gain_decay_samples},
                   {"true_window", scenario.true_window},
                   {"bandwidth_hz", scenario.bandwidth_hz},
                   {"temperature_k", scenario.temperature_k},
                   {"noise_figure_db", scenario.noise_figure_db}};
  j["estimator"] = {{"rank_coarse", estimator.rank_coarse},
                    {"rank_fine", estimator.rank_fine},
                    {"sub_intervals", estimator.sub_intervals},
                    {"gss_tolerance_samples", estimator.gss_tolerance_samples},
                    {"derivative_step_samples", estimator.derivative_step_samples},
                    {"max_windows", estimator.max_windows},
                    {"threshold_quantile", estimator.threshold_quantile},
                    {"calibration_trials", estimator.calibration_trials},
                    {"threshold_scale", estimator.threshold_scale}};
  j["snr_db"] = snr_db;
  j["sir_db"] = json::array();
  for (const double v : sir_db) j["sir_db"].push_back(db_to_json(v));
  j["coarse_ranks"] = coarse_ranks;
  j["fine_ranks"] = fine_ranks;
  j["separations_samples"] = separations_samples;
  j["dense_points"] = dense_points;
  j["trials"] = trials;
  j["seed"] = seed;
  j["fine_end_to_end"] = fine_end_to_end;
  j["tdnc_unsquared"] = tdnc_unsquared;
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string s = to_json().dump();
  return fnv1a64(s.data(), s.size());
}

void ExperimentConfig::validate() const {
  const int m = array.rows * array.cols;
  if (array.rows < 1 || array.cols < 1) config_error("array dimensions must be positive");
  if (m < 3) config_error("array must have at least 3 elements");
  if (!(array.carrier_hz > 0.0) || !(array.spacing_factor > 0.0))
    config_error("carrier_hz and spacing_factor must be positive");

  if (waveform.seq_len < 3 || waveform.seq_len % 2 == 0)
    config_error("seq_len must be odd and >= 3");
  if (!(waveform.symbol_period > 0.0)) config_error("symbol_period_s must be positive");
  if (waveform.oversampling < 1 || waveform.span_symbols < 1 || waveform.pad_samples < 1)
    config_error("oversampling, span_symbols and pad_samples must be >= 1");
  if (!(waveform.rolloff > 0.0) || waveform.rolloff > 1.0)
    config_error("rolloff must be in (0, 1]");

  if (scenario.min_paths < 1 || scenario.max_paths < scenario.min_paths)
    config_error("need 1 <= min_paths <= max_paths");
  if (!(scenario.cone_half_angle_deg > 0.0) || scenario.cone_half_angle_deg > 90.0)
    config_error("cone_half_angle_deg must be in (0, 90]");
  if (!(scenario.excess_delay_mean_samples > 0.0) ||
      !(scenario.gain_decay_samples > 0.0))
    config_error("delay spread parameters must be positive");
  if (scenario.true_window < 2) config_error("true_window must be >= 2");
  if (!(scenario.bandwidth_hz > 0.0) || !(scenario.temperature_k > 0.0))
    config_error("bandwidth_hz and temperature_k must be positive");

  if (estimator.rank_coarse < 1 || estimator.rank_coarse > estimator.rank_fine)
    config_error("need 1 <= rank_coarse <= rank_fine");
  if (estimator.rank_fine > m - 2) config_error("rank_fine must be <= antennas - 2");
  if (estimator.sub_intervals != 0 && estimator.sub_intervals < 2)
    config_error("sub_intervals must be 0 (auto) or >= 2");
  if (!(estimator.gss_tolerance_samples > 0.0) ||
      !(estimator.derivative_step_samples > 0.0))
    config_error("search tolerances must be positive");
  if (estimator.max_windows <= scenario.true_window + 1)
    config_error("max_windows must exceed true_window + 1");
  if (!(estimator.threshold_quantile > 0.0) || !(estimator.threshold_quantile < 1.0))
    config_error("threshold_quantile must be in (0, 1)");
  if (estimator.calibration_trials < 10) config_error("calibration_trials must be >= 10");
  if (!(estimator.threshold_scale > 0.0)) config_error("threshold_scale must be positive");

  if (snr_db.empty() || sir_db.empty()) config_error("snr_db and sir_db must be nonempty");
  for (const double v : snr_db)
    if (!std::isfinite(v)) config_error("snr_db entries must be finite");
  for (const double v : sir_db)
    if (std::isnan(v)) config_error("sir_db entries must not be NaN");
  if (coarse_ranks.empty() || fine_ranks.empty())
    config_error("rank lists must be nonempty");
  for (const int r : coarse_ranks)
    if (r < 1 || r > m - 2) config_error("coarse_ranks entries must be in [1, antennas-2]");
  for (const int r : fine_ranks)
    if (r < 1 || r > m - 2) config_error("fine_ranks entries must be in [1, antennas-2]");
  for (const double s : separations_samples)
    if (!(s >= 0.0) || s > 2.0)
      config_error("separations_samples must lie in [0, 2]");
  if (dense_points < 2) config_error("dense_points must be >= 2");
  if (trials < 1) config_error("trials must be >= 1");
  if (threads < 0) config_error("threads must be >= 0");
}

std::vector<double> default_separations(double snr_db) {
  if (snr_db >= 25.0) return {0.02, 0.05, 0.07, 0.09, 0.11, 0.14, 0.18};
  if (snr_db >= 15.0) return {0.06, 0.10, 0.14, 0.18, 0.22, 0.28};
  return {0.12, 0.18, 0.24, 0.30, 0.38, 0.46};
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;  // NaN lands here: "nan" does not compare equal to itself
}

// ---------------------------------------------------------------------------
// Benchmarks

void run_coarse_benchmark(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const SyncWaveform wf(config.waveform.sync_params());
  const BenchContext ctx = make_context(config, wf);
  const fs::path dir = prepare_out_dir(config);

  CsvWriter auc_csv(dir / "auc.csv", "snr_db,sir_db,rank,method,trials,auc");
  CsvWriter trials_csv(dir / "coarse_trials.csv",
                       "snr_db,sir_db,rank,method,trial,seed,true_window,trace");

  for (std::size_t si = 0; si < config.snr_db.size(); ++si) {
    for (std::size_t qi = 0; qi < config.sir_db.size(); ++qi) {
      const double snr = config.snr_db[si];
      const double sir = config.sir_db[qi];
      const std::size_t point = si * config.sir_db.size() + qi;

      std::vector<CoarseTrialResult> results(config.trials);
      parallel_for(config.trials, config.threads, [&](std::int64_t t) {
        results[t] =
            run_coarse_trial(ctx, snr, sir, trial_seed(config.seed, kTagCoarse, point, t));
      });

      for (std::int64_t t = 0; t < config.trials; ++t) {
        const auto seed = trial_seed(config.seed, kTagCoarse, point, t);
        const auto& res = results[t];
        for (std::size_t r = 0; r < config.coarse_ranks.size(); ++r)
          trials_csv.row(coarse_row(snr, sir, config.coarse_ranks[r], "glrt", t, seed,
                                    res.true_window, res.glrt_traces[r]));
        trials_csv.row(
            coarse_row(snr, sir, 0, "tdnc", t, seed, res.true_window, res.tdnc_trace));
      }

      std::vector<CoarseTrialRecord> tdnc_records(config.trials);
      for (std::int64_t t = 0; t < config.trials; ++t)
        tdnc_records[t] = {results[t].true_window, results[t].tdnc_trace};
      const double tdnc_auc = auc(roc_curve(tdnc_records));

      for (std::size_t r = 0; r < config.coarse_ranks.size(); ++r) {
        std::vector<CoarseTrialRecord> records(config.trials);
        for (std::int64_t t = 0; t < config.trials; ++t)
          records[t] = {results[t].true_window, results[t].glrt_traces[r]};
        const double glrt_auc = auc(roc_curve(records));
        auc_csv.row(format_double(snr) + "," + format_double(sir) + "," +
                    std::to_string(config.coarse_ranks[r]) + ",glrt," +
                    std::to_string(config.trials) + "," + format_double(glrt_auc));
        log << "coarse snr=" << format_double(snr) << " sir=" << format_double(sir)
            << " rank=" << config.coarse_ranks[r] << " auc_glrt=" << format_double(glrt_auc)
            << " auc_tdnc=" << format_double(tdnc_auc) << '\n';
      }
      for (std::size_t r = 0; r < config.coarse_ranks.size(); ++r)
        auc_csv.row(format_double(snr) + "," + format_double(sir) + "," +
                    std::to_string(config.coarse_ranks[r]) + ",tdnc," +
                    std::to_string(config.trials) + "," + format_double(tdnc_auc));
    }
  }

  auc_csv.close();
  trials_csv.close();
  write_manifest(config, dir, {"auc.csv", "coarse_trials.csv"});
}

void run_fine_benchmark(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const SyncWaveform wf(config.waveform.sync_params());
  const BenchContext ctx = make_context(config, wf);
  const fs::path dir = prepare_out_dir(config);

  CsvWriter median_csv(dir / "fine_median.csv",
                       "snr_db,sir_db,rank,method,trials,detect_rate,median_samples,"
                       "mean_samples");
  CsvWriter cdf_csv(dir / "fine_cdf.csv",
                    "snr_db,sir_db,rank,method,error_samples,fraction");
  CsvWriter trials_csv(dir / "fine_trials.csv",
                       "snr_db,sir_db,rank,method,trial,seed,true_toa_samples,"
                       "toa_samples,found");

  for (std::size_t si = 0; si < config.snr_db.size(); ++si) {
    for (std::size_t qi = 0; qi < config.sir_db.size(); ++qi) {
      const double snr = config.snr_db[si];
      const double sir = config.sir_db[qi];
      const std::size_t point = si * config.sir_db.size() + qi;

      double gamma = 0.0;
      if (config.fine_end_to_end)
        gamma = calibrate_thresholds(ctx, snr, sir, point,
                                     std::vector<int>{config.estimator.rank_coarse})[0];

      std::vector<FineTrialResult> results(config.trials);
      parallel_for(config.trials, config.threads, [&](std::int64_t t) {
        results[t] = run_fine_trial(ctx, snr, sir, gamma,
                                    trial_seed(config.seed, kTagFine, point, t));
      });

      for (std::int64_t t = 0; t < config.trials; ++t) {
        const auto seed = trial_seed(config.seed, kTagFine, point, t);
        const auto& res = results[t];
        for (std::size_t r = 0; r < config.fine_ranks.size(); ++r)
          trials_csv.row(fine_row(snr, sir, config.fine_ranks[r], "glrt", t, seed,
                                  res.true_toa_samples, res.glrt_toa_samples[r],
                                  res.glrt_found[r]));
        for (std::size_t r = 0; r < config.fine_ranks.size(); ++r)
          trials_csv.row(fine_row(snr, sir, config.fine_ranks[r], "fdnc", t, seed,
                                  res.true_toa_samples, res.fdnc_toa_samples,
                                  res.fdnc_found));
      }

      const auto summarize = [&](const std::string& method, int rank,
                                 auto&& toa_of) {
        std::vector<double> errors;
        errors.reserve(config.trials);
        int estimated = 0;
        for (const auto& res : results) {
          const double toa = toa_of(res);
          if (std::isnan(toa)) continue;
          ++estimated;
          errors.push_back(std::abs(toa - res.true_toa_samples));
        }
        const double rate = static_cast<double>(estimated) / config.trials;
        if (errors.empty()) {
          median_csv.row(format_double(snr) + "," + format_double(sir) + "," +
                         std::to_string(rank) + "," + method + "," +
                         std::to_string(config.trials) + "," + format_double(rate) +
                         ",nan,nan");
          return;
        }
        const ErrorCdf cdf = error_cdf(std::move(errors));
        median_csv.row(format_double(snr) + "," + format_double(sir) + "," +
                       std::to_string(rank) + "," + method + "," +
                       std::to_string(config.trials) + "," + format_double(rate) + "," +
                       format_double(cdf.median) + "," + format_double(cdf.mean));
        for (std::size_t i = 0; i < cdf.error.size(); ++i)
          cdf_csv.row(format_double(snr) + "," + format_double(sir) + "," +
                      std::to_string(rank) + "," + method + "," +
                      format_double(cdf.error[i]) + "," + format_double(cdf.fraction[i]));
        log << "fine snr=" << format_double(snr) << " sir=" << format_double(sir)
            << " rank=" << rank << " " << method
            << " median=" << format_double(cdf.median) << '\n';
      };

      for (std::size_t r = 0; r < config.fine_ranks.size(); ++r) {
        const std::size_t ri = r;
        summarize("glrt", config.fine_ranks[r],
                  [ri](const FineTrialResult& res) { return res.glrt_toa_samples[ri]; });
      }
      for (std::size_t r = 0; r < config.fine_ranks.size(); ++r)
        summarize("fdnc", config.fine_ranks[r],
                  [](const FineTrialResult& res) { return res.fdnc_toa_samples; });
    }
  }

  median_csv.close();
  cdf_csv.close();
  trials_csv.close();
  write_manifest(config, dir,
                 {"fine_median.csv", "fine_cdf.csv", "fine_trials.csv"});
}

void run_resolvability(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const SyncWaveform wf(config.waveform.sync_params());
  const ArrayGeometry geom = config.array.geometry();
  const fs::path dir = prepare_out_dir(config);

  CsvWriter sweep_csv(dir / "resolvability.csv",
                      "snr_db,separation_samples,trials,success_rate");
  CsvWriter summary_csv(dir / "resolvability_summary.csv",
                        "snr_db,d90_samples,d50_samples,d10_samples,j_max");

  for (std::size_t si = 0; si < config.snr_db.size(); ++si) {
    const double snr = config.snr_db[si];
    ResolvabilityConfig rc;
    rc.snr_db = snr;
    rc.rank = config.estimator.rank_fine;
    rc.trials = config.trials;
    rc.separations_samples = config.separations_samples.empty()
                                 ? default_separations(snr)
                                 : config.separations_samples;
    rc.seed = derive_seed(config.seed, kTagResolvability, si);
    rc.threads = config.threads;
    rc.dense_sub_intervals = config.dense_points;
    rc.derivative_step_samples = config.estimator.derivative_step_samples;

    const auto points = resolvability_sweep(rc, wf, geom);
    for (const auto& p : points)
      sweep_csv.row(format_double(snr) + "," + format_double(p.separation_samples) +
                    "," + std::to_string(rc.trials) + "," +
                    format_double(p.success_rate));

    const double d90 = separation_at_rate(points, 0.90);
    const double d50 = separation_at_rate(points, 0.50);
    const double d10 = separation_at_rate(points, 0.10);
    const std::string jmax =
        std::isfinite(d10) ? std::to_string(bracket_budget(d10)) : "nan";
    summary_csv.row(format_double(snr) + "," + format_double(d90) + "," +
                    format_double(d50) + "," + format_double(d10) + "," + jmax);
    log << "resolvability snr=" << format_double(snr) << " d90=" << format_double(d90)
        << " d50=" << format_double(d50) << " d10=" << format_double(d10) << '\n';
  }

  sweep_csv.close();
  summary_csv.close();
  write_manifest(config, dir, {"resolvability.csv", "resolvability_summary.csv"});
}

void run_timing(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const SyncWaveform wf(config.waveform.sync_params());
  const BenchContext ctx = make_context(config, wf);
  const fs::path dir = prepare_out_dir(config);

  CsvWriter timing_csv(dir / "timing.csv",
                       "method,invocations,mean_ns,std_ns,min_ns,max_ns");

  const int n = std::max(config.trials, 100);
  const double snr = config.snr_db.front();
  const double sir = config.sir_db.front();
  const EstimatorConfig ec = config.estimator.estimator_config(wf, snr);

  std::vector<double> glrt_ns(n), fdnc_ns(n);
  using clock = std::chrono::steady_clock;
  for (int t = 0; t < n; ++t) {
    RandomStream rng(trial_seed(config.seed, kTagTiming, 0, t));
    const MultipathScenario sc = make_trial_scenario(ctx, rng, snr, sir);
    const auto intf = make_interferer(ctx, sc, rng);
    const ObservationWindow w =
        synth_window(sc, wf, intf ? &*intf : nullptr, ctx.true_window(sc) - 1);
    const MatrixXcd yf = wf.dft().rows_forward(w.samples);

    const auto t0 = clock::now();
    (void)fine_estimate(yf, ec, wf);
    const auto t1 = clock::now();
    (void)fdnc_fine_estimate(yf, ec, wf);
    const auto t2 = clock::now();
    glrt_ns[t] = std::chrono::duration<double, std::nano>(t1 - t0).count();
    fdnc_ns[t] = std::chrono::duration<double, std::nano>(t2 - t1).count();
  }

  const auto report = [&](const std::string& method, const std::vector<double>& ns) {
    const double mean = std::accumulate(ns.begin(), ns.end(), 0.0) / ns.size();
    double var = 0.0;
    for (const double v : ns) var += (v - mean) * (v - mean);
    var /= ns.size();
    const auto [mn, mx] = std::minmax_element(ns.begin(), ns.end());
    timing_csv.row(method + "," + std::to_string(ns.size()) + "," +
                   format_double(mean) + "," + format_double(std::sqrt(var)) + "," +
                   format_double(*mn) + "," + format_double(*mx));
    return mean;
  };
  const double glrt_mean = report("glrt", glrt_ns);
  const double fdnc_mean = report("fdnc", fdnc_ns);
  log << "timing glrt_mean_ns=" << format_double(glrt_mean)
      << " fdnc_mean_ns=" << format_double(fdnc_mean)
      << " ratio=" << format_double(glrt_mean / fdnc_mean) << '\n';

  timing_csv.close();
  write_manifest(config, dir, {"timing.csv"});
}

void run_synth_cir(const ExperimentConfig& config, const std::string& path,
                   std::ostream& log) {
  config.validate();
  const SyncWaveform wf(config.waveform.sync_params());
  const BenchContext ctx = make_context(config, wf);
  RandomStream rng(derive_seed(config.seed, kTagSynth, 0));
  const MultipathScenario sc =
      make_trial_scenario(ctx, rng, config.snr_db.front(), config.sir_db.front());
  write_cir(path, sc);
  log << "wrote scenario with " << sc.sync_paths.size() << " sync and "
      << sc.intf_paths.size() << " interference paths to " << path << '\n';
}

// ---------------------------------------------------------------------------
// Replay

bool replay_trial(const std::string& run_dir, const std::string& table, int row,
                  const ExperimentConfig* expected_config, std::ostream& log) {
  const fs::path dir(run_dir);
  const json manifest = load_manifest(dir);
  if (!manifest.contains("config"))
    throw std::invalid_argument("manifest has no embedded config");
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.at("config"));

  if (expected_config != nullptr && expected_config->hash() != cfg.hash())
    throw std::invalid_argument(
        "config mismatch: provided config hashes to " + hex64(expected_config->hash()) +
        " but the run was produced with " + hex64(cfg.hash()));

  std::string file;
  if (table == "coarse")
    file = "coarse_trials.csv";
  else if (table == "fine")
    file = "fine_trials.csv";
  else
    throw std::invalid_argument("table must be \"coarse\" or \"fine\"");

  const Table t = read_table(dir / file);
  if (row < 0 || static_cast<std::size_t>(row) >= t.rows.size())
    throw std::invalid_argument("row " + std::to_string(row) + " out of range (" +
                                std::to_string(t.rows.size()) + " data rows)");
  const auto& fields = t.rows[row];
  const std::string& stored = t.raw_rows[row];

  const double snr = to_double(fields[col(t, "snr_db")]);
  const double sir = to_double(fields[col(t, "sir_db")]);
  const int rank = std::stoi(fields[col(t, "rank")]);
  const std::string method = fields[col(t, "method")];
  const std::int64_t trial = std::stoll(fields[col(t, "trial")]);

  const SyncWaveform wf(cfg.waveform.sync_params());
  const BenchContext ctx = make_context(cfg, wf);
  const std::size_t point = grid_index(cfg, snr, sir);

  std::string regenerated;
  if (table == "coarse") {
    const auto seed = trial_seed(cfg.seed, kTagCoarse, point, trial);
    const CoarseTrialResult res = run_coarse_trial(ctx, snr, sir, seed);
    if (method == "tdnc") {
      regenerated = coarse_row(snr, sir, 0, "tdnc", trial, seed, res.true_window,
                               res.tdnc_trace);
    } else {
      const auto it =
          std::find(cfg.coarse_ranks.begin(), cfg.coarse_ranks.end(), rank);
      if (it == cfg.coarse_ranks.end())
        throw std::invalid_argument("rank not in config coarse_ranks");
      regenerated = coarse_row(
          snr, sir, rank, "glrt", trial, seed, res.true_window,
          res.glrt_traces[static_cast<std::size_t>(it - cfg.coarse_ranks.begin())]);
    }
  } else {
    double gamma = 0.0;
    if (cfg.fine_end_to_end)
      gamma = calibrate_thresholds(ctx, snr, sir, point,
                                   std::vector<int>{cfg.estimator.rank_coarse})[0];
    const auto seed = trial_seed(cfg.seed, kTagFine, point, trial);
    const FineTrialResult res = run_fine_trial(ctx, snr, sir, gamma, seed);
    const auto it = std::find(cfg.fine_ranks.begin(), cfg.fine_ranks.end(), rank);
    if (it == cfg.fine_ranks.end())
      throw std::invalid_argument("rank not in config fine_ranks");
    const auto ri = static_cast<std::size_t>(it - cfg.fine_ranks.begin());
    if (method == "fdnc")
      regenerated = fine_row(snr, sir, rank, "fdnc", trial, seed, res.true_toa_samples,
                             res.fdnc_toa_samples, res.fdnc_found);
    else
      regenerated = fine_row(snr, sir, rank, "glrt", trial, seed, res.true_toa_samples,
                             res.glrt_toa_samples[ri], res.glrt_found[ri]);
  }

  const bool match = regenerated == stored;
  if (match) {
    log << "replay match: " << file << " row " << row << '\n';
  } else {
    log << "replay MISMATCH in " << file << " row " << row << '\n'
        << "  stored:      " << stored << '\n'
        << "  regenerated: " << regenerated << '\n';
  }
  return match;
}

// ---------------------------------------------------------------------------
// --check conditions

namespace {

std::optional<double> find_auc(const Table& t, double snr, double sir, int rank,
                               const std::string& method) {
  const int cs = col(t, "snr_db"), cq = col(t, "sir_db"), cr = col(t, "rank"),
            cm = col(t, "method"), ca = col(t, "auc");
  for (const auto& row : t.rows) {
    if (to_double(row[cs]) == snr && to_double(row[cq]) == sir &&
        std::stoi(row[cr]) == rank && row[cm] == method)
      return to_double(row[ca]);
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> check_coarse_results(const ExperimentConfig& config) {
  const Table t = read_table(fs::path(config.out_dir) / "auc.csv");
  std::vector<std::string> violations;
  const int rank = *std::max_element(config.coarse_ranks.begin(),
                                     config.coarse_ranks.end());
  double sir = std::numeric_limits<double>::infinity();
  for (const double v : config.sir_db)
    if (std::isfinite(v)) sir = std::min(sir, v);
  if (!std::isfinite(sir)) return violations;  // nothing to compare against

  for (const double snr : config.snr_db) {
    const auto glrt = find_auc(t, snr, sir, rank, "glrt");
    const auto tdnc = find_auc(t, snr, sir, rank, "tdnc");
    if (!glrt || !tdnc) {
      violations.push_back("auc.csv lacks rows for the checked grid point");
      continue;
    }
    if (!(*glrt < *tdnc))
      violations.push_back("AUC ordering violated at snr=" + format_double(snr) +
                           " sir=" + format_double(sir) + ": glrt=" +
                           format_double(*glrt) + " tdnc=" + format_double(*tdnc));
  }
  return violations;
}

std::vector<std::string> check_fine_results(const ExperimentConfig& config) {
  const Table t = read_table(fs::path(config.out_dir) / "fine_median.csv");
  std::vector<std::string> violations;
  const int rank =
      *std::max_element(config.fine_ranks.begin(), config.fine_ranks.end());
  const double snr =
      *std::max_element(config.snr_db.begin(), config.snr_db.end());
  const int cs = col(t, "snr_db"), cq = col(t, "sir_db"), cr = col(t, "rank"),
            cm = col(t, "method"), cmed = col(t, "median_samples");
  for (const double sir : config.sir_db) {
    std::optional<double> glrt, fdnc;
    for (const auto& row : t.rows) {
      if (to_double(row[cs]) != snr || to_double(row[cq]) != sir ||
          std::stoi(row[cr]) != rank)
        continue;
      if (row[cm] == "glrt") glrt = to_double(row[cmed]);
      if (row[cm] == "fdnc") fdnc = to_double(row[cmed]);
    }
    if (!glrt || !fdnc) {
      violations.push_back("fine_median.csv lacks rows for the checked grid point");
      continue;
    }
    if (!(*glrt < *fdnc))
      violations.push_back("median ordering violated at snr=" + format_double(snr) +
                           " sir=" + format_double(sir) + ": glrt=" +
                           format_double(*glrt) + " fdnc=" + format_double(*fdnc));
  }
  return violations;
}

std::vector<std::string> check_resolvability_results(const ExperimentConfig& config) {
  const Table t =
      read_table(fs::path(config.out_dir) / "resolvability_summary.csv");
  std::vector<std::string> violations;
  const int cs = col(t, "snr_db"), cd = col(t, "d90_samples");
  const auto band = [](double snr) -> std::optional<std::pair<double, double>> {
    if (snr == 30.0) return std::make_pair(0.05, 0.15);
    if (snr == 20.0) return std::make_pair(0.10, 0.26);
    if (snr == 10.0) return std::make_pair(0.22, 0.42);
    return std::nullopt;
  };
  for (const auto& row : t.rows) {
    const double snr = to_double(row[cs]);
    const auto b = band(snr);
    if (!b) continue;
    const double d90 = to_double(row[cd]);
    if (!(d90 >= b->first && d90 <= b->second))
      violations.push_back("d90 at snr=" + format_double(snr) + " is " +
                           format_double(d90) + ", outside [" +
                           format_double(b->first) + ", " + format_double(b->second) +
                           "]");
  }
  return violations;
}

std::vector<std::string> check_timing_results(const ExperimentConfig& config) {
  const Table t = read_table(fs::path(config.out_dir) / "timing.csv");
  std::vector<std::string> violations;
  const int cm = col(t, "method"), cmean = col(t, "mean_ns");
  std::optional<double> glrt, fdnc;
  for (const auto& row : t.rows) {
    if (row[cm] == "glrt") glrt = to_double(row[cmean]);
    if (row[cm] == "fdnc") fdnc = to_double(row[cmean]);
  }
  if (!glrt || !fdnc) {
    violations.push_back("timing.csv lacks glrt/fdnc rows");
    return violations;
  }
  if (!(*fdnc < *glrt))
    violations.push_back("timing ordering violated: fdnc mean " + format_double(*fdnc) +
                         " ns is not below glrt mean " + format_double(*glrt) + " ns");
  return violations;
}

}  // namespace toa
