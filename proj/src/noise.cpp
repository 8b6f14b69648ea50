#include "ddsim/noise.hpp"

#include <cmath>
#include <complex>

#include "ddsim/errors.hpp"

namespace ddsim {

DriftSample sample_drift(const DriftModel& model, RngStream& rng) {
  if (model.sigma_hz < 0) throw std::invalid_argument("sample_drift: sigma < 0");
  const double rho = model.correlation;
  if (rho < -1.0 || rho > 1.0)
    throw std::invalid_argument("sample_drift: correlation outside [-1, 1]");
  const double s = two_pi * model.sigma_hz;
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  DriftSample d;
  d.delta1 = s * z1;
  d.delta2 = s * (rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2);
  return d;
}

double ou_spectrum(double sigma, double tau_c, double omega) {
  const double wt = omega * tau_c;
  return 2.0 * sigma * sigma * tau_c / (1.0 + wt * wt);
}

namespace {

constexpr uint64_t qubit1_tag = 1;
constexpr uint64_t qubit2_tag = 2;

std::vector<double> ou_cells(const FastNoiseModel& m, size_t n, RngStream rng) {
  const double alpha = std::exp(-m.dt / m.tau_c);
  const double q = m.sigma * std::sqrt(1.0 - alpha * alpha);
  std::vector<double> x(n);
  double v = m.sigma * rng.normal();  // stationary start
  for (size_t k = 0; k < n; ++k) {
    x[k] = v;
    v = alpha * v + q * rng.normal();
  }
  return x;
}

size_t cell_count(double total_time, double dt) {
  auto n = static_cast<size_t>(std::ceil(total_time / dt - 1e-9));
  return n == 0 ? 1 : n;
}

}  // namespace

NoiseTrace sample_fast_trace(const FastNoiseModel& model, double total_time,
                             const NoiseStreamKey& key, bool correlated) {
  if (total_time <= 0) throw std::invalid_argument("sample_fast_trace: T <= 0");
  if (model.dt <= 0) throw std::invalid_argument("sample_fast_trace: dt <= 0");
  if (model.dt >= model.tau_c)
    throw std::invalid_argument("sample_fast_trace: dt >= tau_c (undersampled)");

  const size_t n = cell_count(total_time, model.dt);
  NoiseTrace tr;
  tr.dt = model.dt;
  tr.seed = key.seed;
  tr.shot = key.shot;
  tr.delta1 = ou_cells(
      model, n,
      make_stream(key.seed, {static_cast<uint64_t>(StreamPurpose::fast_noise),
                             key.run, key.shot, qubit1_tag}));
  tr.delta2 = correlated
                  ? tr.delta1
                  : ou_cells(model, n,
                             make_stream(key.seed,
                                         {static_cast<uint64_t>(StreamPurpose::fast_noise),
                                          key.run, key.shot, qubit2_tag}));
  return tr;
}

std::vector<double> coherent_field_cells(const CoherentFieldModel& model,
                                         double total_time, double dt) {
  const size_t n = cell_count(total_time, dt);
  std::vector<double> v(n);
  const double w = two_pi * model.frequency_hz;
  for (size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;  // cell midpoint
    v[k] = model.amplitude * std::cos(w * t + model.phase);
  }
  return v;
}

CoherentFieldModel synced_field(double amplitude, double pulse_spacing,
                                double first_center) {
  if (pulse_spacing <= 0)
    throw std::invalid_argument("synced_field: pulse spacing must be > 0");
  CoherentFieldModel m;
  m.amplitude = amplitude;
  m.frequency_hz = 1.0 / (2.0 * pulse_spacing);
  // cos(w t + phase) crosses zero at t = first_center, rising afterwards
  m.phase = -pi / 2 - two_pi * m.frequency_hz * (first_center - pulse_spacing);
  return m;
}

double calibrate_fast_noise(double target_t2, double tau_c,
                            const CalibrationOptions& opt) {
  if (target_t2 <= 0) throw std::invalid_argument("calibrate_fast_noise: t2 <= 0");
  if (tau_c <= 0) throw std::invalid_argument("calibrate_fast_noise: tau_c <= 0");

  FastNoiseModel unit;
  unit.sigma = 1.0;
  unit.tau_c = tau_c;
  unit.dt = std::min({1e-6, tau_c / 50.0, target_t2 / 200.0});

  // The OU trace is linear in sigma, so the unit-sigma phase integrals are
  // enough: W(sigma) = |mean exp(i sigma phi_m)|.
  std::vector<double> phi(opt.trace_count);
  for (int m = 0; m < opt.trace_count; ++m) {
    const NoiseTrace tr = sample_fast_trace(
        unit, target_t2, {0xCA11B8A7E5EEDull, 0, static_cast<uint64_t>(m)}, true);
    double acc = 0;
    const size_t n = cell_count(target_t2, unit.dt);
    for (size_t k = 0; k < n; ++k) {
      const double t0 = k * unit.dt;
      const double t1 = std::min(target_t2, (k + 1) * unit.dt);
      if (t1 <= t0) break;
      acc += tr.delta2[k] * (t1 - t0);
    }
    phi[m] = acc;
  }

  auto contrast = [&phi](double sigma) {
    std::complex<double> z = 0;
    for (double p : phi) z += std::exp(std::complex<double>(0.0, sigma * p));
    return std::abs(z) / static_cast<double>(phi.size());
  };

  const double target = std::exp(-1.0);
  double lo = 0.0, hi = 1.0 / target_t2;
  int guard = 0;
  while (contrast(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60)
      throw CalibrationError("calibrate_fast_noise: failed to bracket the 1/e point");
  }
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double w = contrast(mid);
    if (std::abs(w - target) < opt.tolerance) return mid;
    (w > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NoiseTrace compose_noise_trace(const NoiseSettings& s, double total_time,
                               uint64_t seed, uint64_t run, uint64_t shot) {
  DriftSample drift;
  if (s.drift_mode != NoiseSettings::DriftMode::off) {
    RngStream rng =
        s.drift_mode == NoiseSettings::DriftMode::per_run
            ? make_stream(seed, {static_cast<uint64_t>(StreamPurpose::drift), run})
            : make_stream(seed,
                          {static_cast<uint64_t>(StreamPurpose::drift), run, shot});
    drift = sample_drift(s.drift, rng);
  }

  NoiseTrace tr;
  if (s.fast && total_time > 0) {
    tr = sample_fast_trace(*s.fast, total_time, {seed, run, shot}, s.fast_correlated);
  } else if (total_time <= 0) {
    tr = NoiseTrace::constant(1e-12, 0.0, 0.0);
  } else {
    const size_t n = s.coherent ? cell_count(total_time, s.dt) : 1;
    tr.dt = s.coherent ? s.dt : std::max(total_time, 1e-12);
    tr.delta1.assign(n, 0.0);
    tr.delta2.assign(n, 0.0);
  }
  tr.seed = seed;
  tr.shot = shot;
  tr.drift1 = drift.delta1;
  tr.drift2 = drift.delta2;

  for (double& v : tr.delta1) v += drift.delta1;
  for (double& v : tr.delta2) v += drift.delta2;

  if (s.coherent) {
    const std::vector<double> f = coherent_field_cells(*s.coherent, total_time, tr.dt);
    if (f.size() != tr.delta1.size())
      throw std::invalid_argument("compose_noise_trace: field grid mismatch");
    for (size_t k = 0; k < f.size(); ++k) {
      tr.delta1[k] += f[k];
      tr.delta2[k] += f[k];
    }
  }
  return tr;
}

void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: length must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * two_pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w = 1.0;
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

SpectrumEstimate estimate_spectrum(const std::vector<NoiseTrace>& traces) {
  if (traces.size() < 2)
    throw std::invalid_argument("estimate_spectrum: need at least two traces");
  const double dt = traces.front().dt;
  const size_t n_raw = traces.front().delta2.size();
  for (const auto& tr : traces)
    if (tr.dt != dt || tr.delta2.size() != n_raw)
      throw std::invalid_argument("estimate_spectrum: mismatched trace grids");

  size_t n = 1;
  while (n * 2 <= n_raw) n *= 2;

  SpectrumEstimate est;
  est.bin_width_hz = 1.0 / (static_cast<double>(n) * dt);
  est.freq_hz.resize(n / 2 - 1);
  est.value.assign(n / 2 - 1, 0.0);
  for (size_t k = 1; k < n / 2; ++k)
    est.freq_hz[k - 1] = static_cast<double>(k) * est.bin_width_hz;

  std::vector<std::complex<double>> buf(n);
  for (const auto& tr : traces) {
    double m = 0;
    for (size_t k = 0; k < n; ++k) m += tr.delta2[k];
    m /= static_cast<double>(n);
    for (size_t k = 0; k < n; ++k) buf[k] = tr.delta2[k] - m;
    fft_radix2(buf, -1);
    // one-sided density: 2 dt |X_k|^2 / n
    for (size_t k = 1; k < n / 2; ++k)
      est.value[k - 1] += 2.0 * dt * std::norm(buf[k]) / static_cast<double>(n);
  }
  for (double& v : est.value) v /= static_cast<double>(traces.size());
  return est;
}

}  // namespace ddsim
