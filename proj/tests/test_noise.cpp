#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <ddsim/errors.hpp>
#include <ddsim/math_util.hpp>
#include <ddsim/noise.hpp>

#include "oracles.hpp"

using namespace ddsim;

TEST_CASE("drift: zero width gives exactly zero offsets") {
  DriftModel m;
  m.sigma_hz = 0;
  RngStream rng = make_stream(1, {2});
  const DriftSample d = sample_drift(m, rng);
  CHECK(d.delta1 == 0.0);
  CHECK(d.delta2 == 0.0);
}

TEST_CASE("drift: full correlation duplicates the draw") {
  DriftModel m;
  m.correlation = 1.0;
  for (int r = 0; r < 50; ++r) {
    RngStream rng = make_stream(3, {static_cast<uint64_t>(r)});
    const DriftSample d = sample_drift(m, rng);
    CHECK(d.delta1 == doctest::Approx(d.delta2).epsilon(1e-15));
  }
}

TEST_CASE("drift: sample standard deviation matches the configured width") {
  DriftModel m;  // 20 kHz
  std::vector<double> d1(10000), d2(10000);
  for (size_t r = 0; r < d1.size(); ++r) {
    RngStream rng = make_stream(11, {r});
    const DriftSample d = sample_drift(m, rng);
    d1[r] = d.delta1;
    d2[r] = d.delta2;
  }
  CHECK(sample_std(d1) == doctest::Approx(two_pi * 20e3).epsilon(0.03));
  CHECK(sample_std(d2) == doctest::Approx(two_pi * 20e3).epsilon(0.03));
}

TEST_CASE("drift: independent draws when correlation is zero") {
  DriftModel m;
  m.correlation = 0.0;
  double acc11 = 0, acc22 = 0, acc12 = 0;
  const int n = 20000;
  for (int r = 0; r < n; ++r) {
    RngStream rng = make_stream(13, {static_cast<uint64_t>(r)});
    const DriftSample d = sample_drift(m, rng);
    acc11 += d.delta1 * d.delta1;
    acc22 += d.delta2 * d.delta2;
    acc12 += d.delta1 * d.delta2;
  }
  CHECK(std::abs(acc12 / std::sqrt(acc11 * acc22)) < 0.03);
}

TEST_CASE("fast noise: zero sigma gives an identically zero trace") {
  FastNoiseModel m;
  m.sigma = 0;
  m.tau_c = 100e-6;
  m.dt = 1e-6;
  const NoiseTrace tr = sample_fast_trace(m, 1e-3, {1, 0, 0});
  for (double v : tr.delta2) CHECK(v == 0.0);
}

TEST_CASE("fast noise: undersampled step rejected") {
  FastNoiseModel m;
  m.tau_c = 1e-6;
  m.dt = 1e-6;
  CHECK_THROWS_AS(sample_fast_trace(m, 1e-3, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("fast noise: stationary mean and variance") {
  FastNoiseModel m;
  m.sigma = 5e3;
  m.tau_c = 100e-6;
  m.dt = 2e-6;
  const double t = 100 * m.tau_c;
  double acc = 0, acc2 = 0;
  long count = 0;
  for (int s = 0; s < 500; ++s) {
    const NoiseTrace tr = sample_fast_trace(m, t, {77, 0, static_cast<uint64_t>(s)});
    for (double v : tr.delta2) {
      acc += v;
      acc2 += v * v;
      ++count;
    }
  }
  const double mean_v = acc / count;
  const double var_v = acc2 / count - mean_v * mean_v;
  CHECK(std::abs(mean_v) < 0.05 * m.sigma);
  CHECK(var_v == doctest::Approx(m.sigma * m.sigma).epsilon(0.05));
}

TEST_CASE("fast noise: lag autocovariance matches the OU closed form") {
  FastNoiseModel m;
  m.sigma = 4e3;
  m.tau_c = 50e-6;
  m.dt = 2e-6;
  const int lag = static_cast<int>(m.tau_c / m.dt);
  double acc = 0;
  long count = 0;
  for (int s = 0; s < 400; ++s) {
    const NoiseTrace tr = sample_fast_trace(m, 5e-3, {91, 0, static_cast<uint64_t>(s)});
    for (size_t k = 0; k + lag < tr.delta2.size(); ++k) {
      acc += tr.delta2[k] * tr.delta2[k + lag];
      ++count;
    }
  }
  const double cov = acc / count;
  CHECK(cov == doctest::Approx(m.sigma * m.sigma * std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("fast noise: reproducible per (seed, run, shot), distinct across shots") {
  FastNoiseModel m;
  m.tau_c = 100e-6;
  const NoiseTrace a = sample_fast_trace(m, 1e-3, {5, 2, 9});
  const NoiseTrace b = sample_fast_trace(m, 1e-3, {5, 2, 9});
  const NoiseTrace c = sample_fast_trace(m, 1e-3, {5, 2, 10});
  CHECK(a.delta2 == b.delta2);
  CHECK(a.delta2 != c.delta2);
}

TEST_CASE("fast noise: per-qubit correlation switch") {
  FastNoiseModel m;
  m.tau_c = 100e-6;
  const NoiseTrace corr = sample_fast_trace(m, 1e-3, {5, 0, 1}, true);
  CHECK(corr.delta1 == corr.delta2);
  const NoiseTrace indep = sample_fast_trace(m, 1e-3, {5, 0, 1}, false);
  CHECK(indep.delta1 != indep.delta2);
  CHECK(indep.delta1 == corr.delta1);  // qubit-1 stream unchanged
}

TEST_CASE("fft: matches a naive DFT") {
  RngStream rng = make_stream(8, {1});
  const size_t n = 64;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  auto ref = x;
  std::vector<std::complex<double>> dft(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (size_t j = 0; j < n; ++j)
      acc += ref[j] * std::exp(std::complex<double>(
                          0.0, -two_pi * static_cast<double>(k * j) / n));
    dft[k] = acc;
  }
  fft_radix2(x, -1);
  for (size_t k = 0; k < n; ++k) CHECK(std::abs(x[k] - dft[k]) < 1e-9);
}

namespace {

// manufactured trace set with iid gaussian cells (white discrete noise)
std::vector<NoiseTrace> white_traces(int count, size_t n, double dt, double sigma) {
  std::vector<NoiseTrace> traces(count);
  for (int s = 0; s < count; ++s) {
    RngStream rng = make_stream(123, {static_cast<uint64_t>(s)});
    NoiseTrace& tr = traces[s];
    tr.dt = dt;
    tr.delta2.resize(n);
    for (size_t k = 0; k < n; ++k) tr.delta2[k] = sigma * rng.normal();
    tr.delta1 = tr.delta2;
  }
  return traces;
}

}  // namespace

TEST_CASE("spectrum estimate: white input is flat and satisfies Parseval") {
  const double dt = 1e-6, sigma = 3e3;
  const size_t n = 4096;
  const auto traces = white_traces(300, n, dt, sigma);
  const SpectrumEstimate est = estimate_spectrum(traces);

  // Parseval: sum S * df = sample variance
  double sum = 0;
  for (double v : est.value) sum += v;
  sum *= est.bin_width_hz;
  double var = 0;
  long count = 0;
  for (const auto& tr : traces) {
    const double m = mean(tr.delta2);
    for (double v : tr.delta2) {
      var += (v - m) * (v - m);
      ++count;
    }
  }
  var /= count;
  CHECK(sum == doctest::Approx(var).epsilon(0.01));

  // flat: the two half-band averages agree within a few percent
  const size_t half = est.value.size() / 2;
  double lo = 0, hi = 0;
  for (size_t i = 0; i < half; ++i) lo += est.value[i];
  for (size_t i = half; i < 2 * half; ++i) hi += est.value[i];
  CHECK(lo / half == doctest::Approx(hi / half).epsilon(0.05));
}

TEST_CASE("spectrum estimate: pure sinusoid concentrates in one bin") {
  const double dt = 1e-6;
  const size_t n = 4096;
  const double f0 = 40.0 / (n * dt);  // bin-centered
  std::vector<NoiseTrace> traces(2);
  for (auto& tr : traces) {
    tr.dt = dt;
    tr.delta2.resize(n);
    for (size_t k = 0; k < n; ++k) tr.delta2[k] = 1e3 * std::sin(two_pi * f0 * k * dt);
    tr.delta1 = tr.delta2;
  }
  const SpectrumEstimate est = estimate_spectrum(traces);
  const size_t peak =
      std::max_element(est.value.begin(), est.value.end()) - est.value.begin();
  CHECK(est.freq_hz[peak] == doctest::Approx(f0).epsilon(1e-9));
  double rest = 0;
  for (size_t i = 0; i < est.value.size(); ++i)
    if (i != peak) rest = std::max(rest, est.value[i]);
  CHECK(rest < 1e-6 * est.value[peak]);
}

TEST_CASE("spectrum estimate: OU input shows the f^-2 tail") {
  FastNoiseModel m;  // shipped calibration: corner well below 1 kHz
  m.sigma = 7.1e3;
  m.tau_c = 7.3e-3;
  m.dt = 1e-6;
  std::vector<NoiseTrace> traces;
  traces.reserve(200);
  for (int s = 0; s < 200; ++s)
    traces.push_back(sample_fast_trace(m, 10e-3, {321, 0, static_cast<uint64_t>(s)}));
  const SpectrumEstimate est = estimate_spectrum(traces);

  std::vector<double> lx, ly;
  for (size_t i = 0; i < est.freq_hz.size(); ++i) {
    if (est.freq_hz[i] < 1e3 || est.freq_hz[i] > 50e3) continue;
    lx.push_back(std::log(est.freq_hz[i]));
    ly.push_back(std::log(est.value[i]));
  }
  const LinearFit fit = fit_line(lx, ly);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(0.1));

  // Parseval holds for the correlated process too
  double sum = 0;
  for (double v : est.value) sum += v;
  sum *= est.bin_width_hz;
  double var = 0;
  long count = 0;
  for (const auto& tr : traces) {
    double mu = 0;
    for (size_t k = 0; k < 8192; ++k) mu += tr.delta2[k];
    mu /= 8192;
    for (size_t k = 0; k < 8192; ++k) {
      var += (tr.delta2[k] - mu) * (tr.delta2[k] - mu);
      ++count;
    }
  }
  var /= count;
  CHECK(sum == doctest::Approx(var).epsilon(0.01));
}

TEST_CASE("spectrum estimate: mismatched grids rejected") {
  auto traces = white_traces(2, 1024, 1e-6, 1.0);
  traces[1].dt = 2e-6;
  CHECK_THROWS_AS(estimate_spectrum(traces), std::invalid_argument);
}

TEST_CASE("calibration: reproduces the 1/e time at a 160 us correlation time") {
  const double target = 200e-6, tau_c = 160e-6;
  const double sigma = calibrate_fast_noise(target, tau_c);

  // independent check with fresh trajectories: the crossing sits within +-10%
  FastNoiseModel m;
  m.sigma = sigma;
  m.tau_c = tau_c;
  m.dt = 1e-6;
  auto contrast_at = [&](double t) {
    std::complex<double> z = 0;
    const int n_traces = 3000;
    for (int s = 0; s < n_traces; ++s) {
      const NoiseTrace tr =
          sample_fast_trace(m, t, {987, 1, static_cast<uint64_t>(s)});
      double phi = 0;
      for (size_t k = 0; k < tr.delta2.size(); ++k) {
        const double t0 = k * m.dt, t1 = std::min(t, (k + 1) * m.dt);
        if (t1 <= t0) break;
        phi += tr.delta2[k] * (t1 - t0);
      }
      z += std::exp(std::complex<double>(0, phi));
    }
    return std::abs(z) / 3000.0;
  };
  const double target_w = std::exp(-1.0);
  CHECK(contrast_at(0.9 * target) > target_w);
  CHECK(contrast_at(1.1 * target) < target_w);

  // closed-form OU decay exponent agrees as well
  const double chi = sigma * sigma * tau_c * tau_c *
                     (target / tau_c + std::exp(-target / tau_c) - 1.0);
  CHECK(chi == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("calibration: vanishing noise in the long-t2 limit") {
  CalibrationOptions opt;
  opt.trace_count = 300;
  const double tau_c = 160e-6;
  const double s_short = calibrate_fast_noise(200e-6, tau_c, opt);
  const double s_long = calibrate_fast_noise(20e-3, tau_c, opt);
  CHECK(s_long < 0.1 * s_short);
  // deep motional narrowing: chi = sigma^2 tau_c t, so sigma -> 1/sqrt(tau_c t)
  CHECK(s_long == doctest::Approx(1.0 / std::sqrt(tau_c * 20e-3)).epsilon(0.1));
}

TEST_CASE("calibration: quasi-static regime scales as 1/t2") {
  // tau_c far beyond the probed times: gaussian decay with sigma = sqrt(2)/t2,
  // so doubling sigma halves the 1/e time (quarters the squared time scale)
  CalibrationOptions opt;
  opt.trace_count = 2000;
  const double s1 = calibrate_fast_noise(200e-6, 1.0, opt);
  const double s2 = calibrate_fast_noise(100e-6, 1.0, opt);
  CHECK(s2 == doctest::Approx(2.0 * s1).epsilon(0.05));
  CHECK(s1 == doctest::Approx(std::sqrt(2.0) / 200e-6).epsilon(0.05));
}

TEST_CASE("coherent field: zero amplitude contributes nothing") {
  CoherentFieldModel f;
  const auto cells = coherent_field_cells(f, 1e-3, 1e-6);
  for (double v : cells) CHECK(v == 0.0);
}

TEST_CASE("composite trace: drift + fast + field adds sample-wise") {
  NoiseSettings s;
  s.drift_mode = NoiseSettings::DriftMode::per_run;
  FastNoiseModel fm;
  fm.sigma = 2e3;
  fm.tau_c = 200e-6;
  fm.dt = 1e-6;
  s.fast = fm;
  CoherentFieldModel field;
  field.amplitude = 500.0;
  field.frequency_hz = 5e3;
  s.coherent = field;
  s.dt = 1e-6;

  const double t = 1e-3;
  const uint64_t seed = 4242, run = 3, shot = 17;
  const NoiseTrace composite = compose_noise_trace(s, t, seed, run, shot);

  RngStream drift_rng =
      make_stream(seed, {static_cast<uint64_t>(StreamPurpose::drift), run});
  const DriftSample drift = sample_drift(s.drift, drift_rng);
  const NoiseTrace fast = sample_fast_trace(fm, t, {seed, run, shot}, true);
  const auto field_cells = coherent_field_cells(field, t, 1e-6);

  REQUIRE(composite.delta2.size() == fast.delta2.size());
  for (size_t k = 0; k < composite.delta2.size(); ++k) {
    CHECK(composite.delta2[k] ==
          doctest::Approx(drift.delta2 + fast.delta2[k] + field_cells[k])
              .epsilon(1e-12));
    CHECK(composite.delta1[k] ==
          doctest::Approx(drift.delta1 + fast.delta1[k] + field_cells[k])
              .epsilon(1e-12));
  }
  CHECK(composite.drift1 == drift.delta1);
}
