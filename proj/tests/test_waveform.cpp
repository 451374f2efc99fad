#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "test_util.hpp"
#include "toa/waveform.hpp"

using namespace toa;

namespace {

SyncWaveform::Params default_params() { return SyncWaveform::Params{}; }

}  // namespace

TEST_SUITE("waveform") {

TEST_CASE("zadoff_chu entries have unit modulus") {
  const auto seq = zadoff_chu(63, 25);
  REQUIRE(seq.size() == 63);
  for (const cplx& s : seq) CHECK(std::abs(s) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zadoff_chu periodic autocorrelation vanishes off zero lag") {
  const int len = 63;
  const auto seq = zadoff_chu(len, 25);
  for (int lag = 0; lag < len; ++lag) {
    cplx acc(0.0, 0.0);
    for (int k = 0; k < len; ++k) acc += seq[k] * std::conj(seq[(k + lag) % len]);
    if (lag == 0)
      CHECK(std::abs(acc) == doctest::Approx(static_cast<double>(len)).epsilon(1e-12));
    else
      CHECK(std::abs(acc) < 1e-9);
  }
}

TEST_CASE("zadoff_chu rejects invalid parameters") {
  CHECK_THROWS_AS(zadoff_chu(64, 25), std::invalid_argument);  // even
  CHECK_THROWS_AS(zadoff_chu(1, 1), std::invalid_argument);    // too short
  CHECK_THROWS_AS(zadoff_chu(63, 0), std::invalid_argument);   // root low
  CHECK_THROWS_AS(zadoff_chu(63, 63), std::invalid_argument);  // root high
  CHECK_THROWS_AS(zadoff_chu(63, 21), std::invalid_argument);  // gcd 21
}

TEST_CASE("rrc_eval rejects invalid parameters") {
  CHECK_THROWS_AS(rrc_eval(0.0, 0.0, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(rrc_eval(0.0, 1.2, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(rrc_eval(0.0, 0.3, 0.0), std::invalid_argument);
  CHECK_NOTHROW(rrc_eval(0.0, 1.0, 1e-8));
}

TEST_CASE("rrc_eval is even and continuous at the removable points") {
  const double beta = 0.3, T = 1e-8;
  for (const double t : {0.3e-8, 1.7e-8, T / (4.0 * beta)})
    CHECK(rrc_eval(t, beta, T) == doctest::Approx(rrc_eval(-t, beta, T)).epsilon(1e-12));

  // Values at the analytic-limit points match the neighboring formula branch.
  const double h0 = rrc_eval(0.0, beta, T);
  CHECK(rrc_eval(1e-4 * T, beta, T) == doctest::Approx(h0).epsilon(1e-6));
  // Probe just outside the singular-point guard (1e-8 symbols) so the
  // formula branch is exercised while the slope contributes < 1e-6.
  const double tq = T / (4.0 * beta);
  const double hq = rrc_eval(tq, beta, T);
  CHECK(rrc_eval(tq + 2e-8 * T, beta, T) == doctest::Approx(hq).epsilon(1e-5));
  CHECK(rrc_eval(tq - 2e-8 * T, beta, T) == doctest::Approx(hq).epsilon(1e-5));
}

TEST_CASE("rrc pulse has unit energy and Nyquist autocorrelation") {
  const double beta = 0.3, T = 1e-8;
  // The pulse decays fast enough that [-40T, 40T] holds nearly all support.
  auto corr = [&](int k) {
    return testutil::simpson(
        [&](double t) { return rrc_eval(t, beta, T) * rrc_eval(t - k * T, beta, T); },
        -40.0 * T, 41.0 * T, 200000);
  };
  CHECK(corr(0) == doctest::Approx(1.0).epsilon(2e-4));
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(corr(k)) < 2e-3);
}

TEST_CASE("PulseShape is the causal shifted prototype with halved edges") {
  PulseShape p{0.3, 9, 1e-8};
  CHECK(p.duration() == doctest::Approx(9e-8));
  CHECK(p.eval(-1e-12) == 0.0);
  CHECK(p.eval(p.duration() + 1e-12) == 0.0);
  const double mid = 0.5 * p.duration();
  CHECK(p.eval(mid) == doctest::Approx(rrc_eval(0.0, 0.3, 1e-8)).epsilon(1e-13));
  CHECK(p.eval(1.3e-8) ==
        doctest::Approx(rrc_eval(1.3e-8 - mid, 0.3, 1e-8)).epsilon(1e-12));
  // Edge samples take the jump midpoint.
  CHECK(p.eval(0.0) == doctest::Approx(0.5 * rrc_eval(-mid, 0.3, 1e-8)).epsilon(1e-13));
  CHECK(p.eval(p.duration()) ==
        doctest::Approx(0.5 * rrc_eval(mid, 0.3, 1e-8)).epsilon(1e-13));
}

TEST_CASE("shaped_eval matches the convolution sum") {
  const auto seq = zadoff_chu(7, 3);
  PulseShape p{0.3, 4, 1e-8};
  for (const double t : {0.0, 0.37e-8, 2.5e-8, 7.77e-8, 9.9e-8}) {
    cplx want(0.0, 0.0);
    for (std::size_t k = 0; k < seq.size(); ++k)
      want += seq[k] * p.eval(t - static_cast<double>(k) * p.symbol_period);
    const cplx got = shaped_eval(seq, p, t);
    CHECK(std::abs(got - want) < 1e-9 * (1.0 + std::abs(want)));
  }

  // At t = 10T only the last symbol contributes and its pulse argument lands
  // exactly on the support edge, so the jump-midpoint rule applies. The
  // symbol-unit arithmetic inside shaped_eval keeps that landing exact.
  const cplx edge = shaped_eval(seq, p, 10.0e-8);
  const cplx want_edge = seq[6] * 0.5 * rrc_eval(2.0e-8, 0.3, 1e-8);
  CHECK(std::abs(edge - want_edge) < 1e-9 * (1.0 + std::abs(want_edge)));
}

TEST_CASE("split_delay_samples splits and snaps") {
  long long whole = 0;
  double frac = -1.0;

  split_delay_samples(2.25, whole, frac);
  CHECK(whole == 2);
  CHECK(frac == doctest::Approx(0.25).epsilon(1e-12));

  split_delay_samples(-0.5, whole, frac);
  CHECK(whole == -1);
  CHECK(frac == doctest::Approx(0.5).epsilon(1e-12));

  split_delay_samples(3.0 + 1e-12, whole, frac);
  CHECK(whole == 3);
  CHECK(frac == 0.0);

  split_delay_samples(3.0 - 1e-12, whole, frac);
  CHECK(whole == 3);
  CHECK(frac == 0.0);

  split_delay_samples(3.0 - 1e-8, whole, frac);
  CHECK(whole == 2);
  CHECK(frac == doctest::Approx(1.0 - 1e-8).epsilon(1e-10));
}

TEST_CASE("window length and sample period follow the construction") {
  const SyncWaveform wf(default_params());
  CHECK(wf.window_len() == 2 * (63 + 9 - 1) + 8);
  CHECK(wf.window_len() == 150);
  CHECK(wf.sample_period() == doctest::Approx(5e-9).epsilon(1e-15));
  CHECK(wf.base_time().size() == 150);
  // The trailing pad is silent at zero delay.
  for (int i = wf.window_len() - wf.params().pad_samples + 1; i < wf.window_len(); ++i)
    CHECK(std::abs(wf.base_time()(i)) == 0.0);
}

TEST_CASE("cached spectra and templates are consistent") {
  const SyncWaveform wf(default_params());
  CHECK(testutil::rel_err(wf.base_dft(), wf.dft().forward(wf.base_time())) < 1e-13);
  CHECK(wf.base_energy() == doctest::Approx(wf.base_time().squaredNorm()).epsilon(1e-13));
  CHECK(wf.coarse_template().norm() == doctest::Approx(1.0).epsilon(1e-13));
  const VectorXcd want = wf.base_time().conjugate() / wf.base_time().norm();
  CHECK(testutil::rel_err(wf.coarse_template(), want) < 1e-13);
}

TEST_CASE("base window samples the continuous signal") {
  const SyncWaveform wf(default_params());
  for (const int i : {0, 1, 17, 80, 141}) {
    const cplx want = wf.value(i * wf.sample_period());
    CHECK(std::abs(wf.base_time()(i) - want) < 1e-9 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("sample_delayed free function evaluates the continuous signal") {
  const auto seq = zadoff_chu(11, 3);
  PulseShape p{0.3, 4, 1e-8};
  const double ts = 5e-9, tau = 2.3e-9;
  const VectorXcd x = sample_delayed(seq, p, tau, 40, ts);
  for (int i = 0; i < 40; ++i) {
    const cplx want = shaped_eval(seq, p, i * ts - tau);
    CHECK(std::abs(x(i) - want) < 1e-12 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("whole-sample delays shift with zero fill") {
  const SyncWaveform wf(default_params());
  const double ts = wf.sample_period();
  const int n = wf.window_len();

  const VectorXcd fwd = wf.sample_delayed(3.0 * ts);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(fwd(i)) == 0.0);
  for (int i = 3; i < n; ++i) CHECK(fwd(i) == wf.base_time()(i - 3));

  const VectorXcd back = wf.sample_delayed(-2.0 * ts);
  for (int i = 0; i < n - 2; ++i) CHECK(back(i) == wf.base_time()(i + 2));
  for (int i = n - 2; i < n; ++i) CHECK(std::abs(back(i)) == 0.0);

  // Shifts that clear the window entirely give silence.
  CHECK(wf.sample_delayed(static_cast<double>(n) * ts).norm() == 0.0);
  CHECK(wf.sample_delayed(-static_cast<double>(n) * ts).norm() == 0.0);
}

TEST_CASE("fractional delays are band-limited shifts of the base window") {
  const SyncWaveform wf(default_params());
  const double ts = wf.sample_period();
  const int n = wf.window_len();

  const double frac = 0.37;
  const VectorXcd pure = wf.sample_delayed(frac * ts);
  const VectorXcd want =
      wf.dft().inverse(wf.base_dft().cwiseProduct(phase_ramp(frac * ts, n, ts)));
  CHECK(testutil::rel_err(pure, want) < 1e-12);

  // Mixed whole + fractional: the same spectrum-shifted window moved by the
  // whole part with zero fill.
  const VectorXcd mixed = wf.sample_delayed((2.0 + frac) * ts);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(mixed(i)) == 0.0);
  VectorXcd expect = VectorXcd::Zero(n);
  expect.tail(n - 2) = want.head(n - 2);
  CHECK(testutil::rel_err(mixed, expect) < 1e-12);
}

TEST_CASE("freq_template rotates the base spectrum") {
  const SyncWaveform wf(default_params());
  const double ts = wf.sample_period();
  const int n = wf.window_len();
  const double tau = 1.4 * ts;

  const DelayTemplate tmpl = wf.delay_template(tau);
  CHECK(tmpl.tau == tau);
  const VectorXcd want_freq = wf.base_dft().cwiseProduct(phase_ramp(tau, n, ts));
  CHECK(testutil::rel_err(tmpl.freq, want_freq) < 1e-13);
  CHECK(tmpl.unit.norm() == doctest::Approx(1.0).epsilon(1e-13));
  const VectorXcd want_unit = tmpl.freq.conjugate() / tmpl.freq.norm();
  CHECK(testutil::rel_err(tmpl.unit, want_unit) < 1e-13);

  // The standalone builder agrees with the member.
  const DelayTemplate same = freq_template(wf.base_dft(), tau, ts, wf.params().pad_samples);
  CHECK(testutil::rel_err(same.freq, tmpl.freq) == 0.0);
}

TEST_CASE("matched template annihilates a window at its own delay") {
  const SyncWaveform wf(default_params());
  const double tau = 0.62 * wf.sample_period();
  const DelayTemplate tmpl = wf.delay_template(tau);
  const VectorXcd xf = wf.dft().forward(wf.sample_delayed(tau));

  // Correlation captures the full energy, so x - (x.u) conj(u) vanishes.
  const cplx corr = xf.transpose() * tmpl.unit;
  CHECK(std::abs(corr) == doctest::Approx(xf.norm()).epsilon(1e-10));
  const VectorXcd residual = xf - corr * tmpl.unit.conjugate();
  CHECK(residual.norm() < 1e-9 * xf.norm());
}

TEST_CASE("freq_template enforces the wrap-free delay range") {
  const SyncWaveform wf(default_params());
  const double ts = wf.sample_period();
  const int pad = wf.params().pad_samples;
  CHECK_NOTHROW(wf.delay_template(-ts));
  CHECK_NOTHROW(wf.delay_template(pad * ts));
  CHECK_THROWS_AS(wf.delay_template(-1.01 * ts), std::invalid_argument);
  CHECK_THROWS_AS(wf.delay_template((pad + 0.01) * ts), std::invalid_argument);
}

TEST_CASE("unit_template matches delay_template") {
  const SyncWaveform wf(default_params());
  VectorXcd fast;
  for (const double m : {-0.5, 0.0, 0.33, 1.5, 7.2}) {
    const double tau = m * wf.sample_period();
    wf.unit_template(tau, fast);
    CHECK(testutil::rel_err(fast, wf.delay_template(tau).unit) < 1e-12);
  }
  CHECK_THROWS_AS(wf.unit_template(-1.5 * wf.sample_period(), fast),
                  std::invalid_argument);
}

TEST_CASE("PeriodicWaveform repeats with its period") {
  const auto seq = zadoff_chu(63, 29);
  PulseShape p{0.3, 9, 1e-8};
  const PeriodicWaveform intf(std::vector<cplx>(seq.begin(), seq.end()), p, 1.7e-8);
  CHECK(intf.period() == doctest::Approx(63e-8).epsilon(1e-15));
  for (const double t : {0.0, 3.3e-8, 5e-7}) {
    const cplx a = intf.value(t);
    const cplx b = intf.value(t + intf.period());
    CHECK(std::abs(a - b) < 1e-9 * (1.0 + std::abs(a)));
    // Never silent: some symbol's pulse always covers t.
    CHECK(std::abs(intf.value(t)) >= 0.0);
  }
}

TEST_CASE("PeriodicWaveform offset shifts the waveform") {
  const auto seq = zadoff_chu(7, 3);
  PulseShape p{0.3, 4, 1e-8};
  const PeriodicWaveform shifted(std::vector<cplx>(seq.begin(), seq.end()), p, 2.5e-8);
  const PeriodicWaveform origin(std::vector<cplx>(seq.begin(), seq.end()), p, 0.0);
  for (const double t : {0.0, 1.1e-8, 6.6e-8})
    CHECK(std::abs(shifted.value(t) - origin.value(t - 2.5e-8)) < 1e-10);
}

}  // TEST_SUITE
