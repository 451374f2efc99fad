#include "toa/glrt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace toa {

namespace {

constexpr double kUnitNormTol = 1e-10;
constexpr double kDenominatorFloor = 1e-300;
// Noise-only scores concentrate around M - rank; a refined peak below a few
// multiples of that is indistinguishable from noise.
constexpr double kLowScoreFactor = 4.0;

void check_window(const MatrixXcd& y, int rank) {
  if (y.rows() < 3) throw std::invalid_argument("window needs at least 3 antennas");
  if (y.cols() < y.rows())
    throw std::invalid_argument("window must be wide: cols >= rows");
  if (rank < 1 || rank > static_cast<int>(y.rows()) - 2)
    throw std::invalid_argument("interference rank must be in [1, antennas - 2]");
}

// Shared score pipeline. `unit` is the unit-norm matched template in the same
// domain as `y` (time for the coarse stage, frequency for the fine stage);
// the statistic is domain-agnostic because the transform is unitary.
ScoreBreakdown score_core(const MatrixXcd& y, const VectorXcd& unit, int rank) {
  check_window(y, rank);
  if (unit.size() != y.cols())
    throw std::invalid_argument("template length does not match window");
  if (std::abs(unit.norm() - 1.0) > kUnitNormTol)
    throw std::invalid_argument("template must have unit norm");

  const int m = static_cast<int>(y.rows());
  const int n = static_cast<int>(y.cols());

  const VectorXcd w = y * unit;
  const MatrixXcd perp = y - w * unit.adjoint();

  // Left singular structure of perp via its M x M Gram matrix: eigenvalues
  // are squared singular values, so the interference-filtered Frobenius
  // residual is exactly the sum of the trailing M - rank eigenvalues.
  MatrixXcd gram = MatrixXcd::Zero(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(perp);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");

  ScoreBreakdown out;
  for (int i = 0; i < m - rank; ++i)
    out.denominator += std::max(eig.eigenvalues()(i), 0.0);
  if (out.denominator < kDenominatorFloor)
    throw DegenerateInputError("residual energy vanished: window is rank deficient");

  const MatrixXcd basis = eig.eigenvectors().rightCols(rank);
  out.numerator = (w - basis * (basis.adjoint() * w)).squaredNorm();
  out.dof = (m - rank) * (n - 1);
  out.noise_var = out.denominator / out.dof;
  out.score = out.numerator / out.denominator * out.dof;
  return out;
}

ScoreFn glrt_objective(const MatrixXcd& window_freq, int rank,
                       const SyncWaveform& waveform) {
  // Captures by reference: callers keep the window and waveform alive for
  // the duration of the search.
  return [&window_freq, rank, &waveform, u = VectorXcd()](double tau) mutable {
    waveform.unit_template(tau, u);
    return score_core(window_freq, u, rank).score;
  };
}

}  // namespace

EstimatorConfig EstimatorConfig::for_waveform(const SyncWaveform& waveform) {
  EstimatorConfig cfg;
  cfg.gss_tolerance = 1e-4 * waveform.sample_period();
  cfg.derivative_step = 1e-4 * waveform.sample_period();
  return cfg;
}

void EstimatorConfig::validate(int antennas) const {
  if (rank_coarse < 1 || rank_coarse > rank_fine)
    throw std::invalid_argument("need 1 <= rank_coarse <= rank_fine");
  if (rank_fine > antennas - 2)
    throw std::invalid_argument("rank_fine must leave at least 2 noise dimensions");
  if (sub_intervals < 2) throw std::invalid_argument("sub_intervals must be >= 2");
  if (!(gss_tolerance > 0.0)) throw std::invalid_argument("gss_tolerance must be positive");
  if (!(derivative_step > 0.0))
    throw std::invalid_argument("derivative_step must be positive");
  if (max_windows < 1) throw std::invalid_argument("max_windows must be >= 1");
  if (coarse_threshold < 0.0)
    throw std::invalid_argument("coarse_threshold must be non-negative");
}

int default_sub_intervals(double snr_db) {
  if (snr_db < 15.0) return 5;
  if (snr_db < 25.0) return 8;
  return 13;
}

MatrixXcd apply_sync_complement(const MatrixXcd& y, const VectorXcd& unit_template) {
  if (unit_template.size() != y.cols())
    throw std::invalid_argument("template length does not match window");
  if (std::abs(unit_template.norm() - 1.0) > kUnitNormTol)
    throw std::invalid_argument("template must have unit norm");
  return y - (y * unit_template) * unit_template.adjoint();
}

MatrixXcd interference_basis(const MatrixXcd& y_perp, int rank) {
  const int m = static_cast<int>(y_perp.rows());
  if (rank < 1 || rank > m - 1)
    throw std::invalid_argument("basis rank must be in [1, rows - 1]");
  if (y_perp.cols() < y_perp.rows())
    throw std::invalid_argument("matrix must be wide: cols >= rows");

  MatrixXcd gram = MatrixXcd::Zero(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(y_perp);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  // Eigenvalues come out ascending; flip to strongest-first.
  return eig.eigenvectors().rightCols(rank).rowwise().reverse();
}

ScoreBreakdown glrt_score(const MatrixXcd& window_freq, double tau, int rank,
                          const SyncWaveform& waveform) {
  VectorXcd u;
  waveform.unit_template(tau, u);
  return score_core(window_freq, u, rank);
}

ScoreBreakdown coarse_score(const MatrixXcd& window_time, int rank,
                            const SyncWaveform& waveform) {
  return score_core(window_time, waveform.coarse_template(), rank);
}

CoarseDetection coarse_detect(const WindowStream& stream, const EstimatorConfig& config,
                              const SyncWaveform& waveform) {
  CoarseDetection out;
  out.trace.reserve(config.max_windows);
  for (std::int64_t l = 0; l < config.max_windows; ++l) {
    const ObservationWindow w = stream.at(l);
    if (l == 0) config.validate(static_cast<int>(w.samples.rows()));
    const double s = coarse_score(w.samples, config.rank_coarse, waveform).score;
    out.trace.push_back(s);
    if (s > config.coarse_threshold) {
      out.index = l;
      return out;
    }
  }
  return out;
}

double central_difference(const ScoreFn& fn, double x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  return (fn(x + step) - fn(x - step)) / (2.0 * step);
}

double score_derivative(const MatrixXcd& window_freq, double tau, int rank,
                        const SyncWaveform& waveform, double step) {
  return central_difference(glrt_objective(window_freq, rank, waveform), tau, step);
}

std::optional<Bracket> bracket_first_max_fn(const ScoreFn& score, int j_count,
                                            double range, double step) {
  if (j_count < 2) throw std::invalid_argument("need at least 2 sub-intervals");
  if (!(range > 0.0)) throw std::invalid_argument("range must be positive");
  // j_count sub-intervals means j_count + 1 endpoints including both range ends.
  const double h = range / j_count;
  double prev = central_difference(score, 0.0, step);
  for (int j = 1; j <= j_count; ++j) {
    const double cur = central_difference(score, j * h, step);
    if (prev > 0.0 && cur < 0.0) return Bracket{j - 1, (j - 1) * h, j * h};
    prev = cur;
  }
  return std::nullopt;
}

std::optional<Bracket> bracket_first_max(const MatrixXcd& window_freq,
                                         const EstimatorConfig& config,
                                         const SyncWaveform& waveform) {
  config.validate(static_cast<int>(window_freq.rows()));
  return bracket_first_max_fn(glrt_objective(window_freq, config.rank_fine, waveform),
                              config.sub_intervals, 2.0 * waveform.sample_period(),
                              config.derivative_step);
}

GssResult golden_section(const ScoreFn& fn, double lo, double hi, double tol,
                         int max_iter) {
  if (!(lo < hi)) throw std::invalid_argument("need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  GssResult out;
  while (b - a > tol && out.iterations < max_iter) {
    if (f1 == f2) {
      // A unimodal maximum with equal interior values lies between them;
      // shrinking both sides keeps flat objectives centered.
      a = x1;
      b = x2;
      x1 = b - ratio * (b - a);
      x2 = a + ratio * (b - a);
      f1 = fn(x1);
      f2 = fn(x2);
    } else if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = fn(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = fn(x1);
    }
    ++out.iterations;
  }
  out.x = 0.5 * (a + b);
  return out;
}

FineResult fine_estimate_fn(const ScoreFn& score, int j_count, double range,
                            double step, double tol) {
  FineResult out;
  int evals = 0;
  const ScoreFn counted = [&score, &evals](double x) {
    ++evals;
    return score(x);
  };

  const auto bracket = bracket_first_max_fn(counted, j_count, range, step);
  if (!bracket) {
    out.tau = 0.5 * range;  // fallback: center of the search range
    out.diag.score_evals = evals;
    return out;
  }
  out.diag.bracket_index = bracket->index;
  out.diag.bracket_lo = bracket->lo;
  out.diag.bracket_hi = bracket->hi;

  const GssResult gss = golden_section(counted, bracket->lo, bracket->hi, tol);
  out.tau = gss.x;
  out.found = true;
  out.diag.gss_iterations = gss.iterations;
  out.diag.final_score = counted(gss.x);
  out.diag.score_evals = evals;
  return out;
}

FineResult fine_estimate(const MatrixXcd& window_freq, const EstimatorConfig& config,
                         const SyncWaveform& waveform) {
  const int m = static_cast<int>(window_freq.rows());
  config.validate(m);
  FineResult out = fine_estimate_fn(
      glrt_objective(window_freq, config.rank_fine, waveform), config.sub_intervals,
      2.0 * waveform.sample_period(), config.derivative_step, config.gss_tolerance);
  if (!out.found) {
    // fallback score for diagnostics; degenerate inputs already threw above
    out.diag.final_score = glrt_score(window_freq, out.tau, config.rank_fine, waveform).score;
    ++out.diag.score_evals;
  }
  out.diag.low_score = out.diag.final_score < kLowScoreFactor * (m - config.rank_fine);
  return out;
}

ToaEstimate estimate_toa(const WindowStream& stream, const EstimatorConfig& config,
                         const SyncWaveform& waveform) {
  using clock = std::chrono::steady_clock;
  ToaEstimate out;

  const auto t0 = clock::now();
  CoarseDetection det = coarse_detect(stream, config, waveform);
  const auto t1 = clock::now();
  out.coarse_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  out.coarse_trace = std::move(det.trace);
  if (!det.index) return out;

  out.detected = true;
  out.coarse_index = *det.index;
  const double ts = waveform.sample_period();

  if (out.coarse_index == 0) {
    // No preceding window to refine on; report the fallback offset.
    out.fine_offset = ts;
    out.absolute_toa = (out.coarse_index - 1) * ts + out.fine_offset;
    return out;
  }

  const ObservationWindow w = stream.at(out.coarse_index - 1);
  const MatrixXcd yf = waveform.dft().rows_forward(w.samples);
  const auto t2 = clock::now();
  const FineResult fine = fine_estimate(yf, config, waveform);
  const auto t3 = clock::now();
  out.fine_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t3 - t2).count();

  out.fine_ok = fine.found;
  out.fine = fine.diag;
  out.fine_offset = fine.tau;
  out.absolute_toa = (out.coarse_index - 1) * ts + fine.tau;
  return out;
}

}  // namespace toa
