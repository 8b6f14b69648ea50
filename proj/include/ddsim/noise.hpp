#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "ddsim/math_util.hpp"
#include "ddsim/noise_trace.hpp"
#include "ddsim/rng.hpp"

namespace ddsim {

// ---------------------------------------------------------------------------
// Detuning processes: a per-run Gaussian quasi-static drift, a fast stationary
// Ornstein-Uhlenbeck process whose one-sided spectrum falls as f^-2 above the
// corner frequency 1/(2 pi tau_c), and an optional deterministic sinusoidal
// field. All generators are pure functions of (seed, run, shot, qubit).
// ---------------------------------------------------------------------------

struct DriftModel {
  double sigma_hz = 20e3;        // standard deviation of the resonance offset
  double correlation = 1.0;      // inter-qubit correlation in [-1, 1]
};

struct DriftSample {
  double delta1 = 0;  // rad/s
  double delta2 = 0;
};

/// One pair of quasi-static offsets ~ Normal(0, (2 pi sigma_hz)^2) with the
/// configured inter-qubit correlation. Drawn once per experimental run.
DriftSample sample_drift(const DriftModel& model, RngStream& rng);

struct FastNoiseModel {
  double sigma = 7.1e3;    // rad/s, stationary standard deviation
  double tau_c = 7.3e-3;   // s, correlation time
  double dt = 1e-6;        // s, sample step (must be < tau_c)
};

/// One-sided angular-frequency spectrum of the OU process,
/// S(w) = 2 sigma^2 tau_c / (1 + (w tau_c)^2), defined for w >= 0 with
/// chi = (1/2pi) integral S(w) F(w) dw.
double ou_spectrum(double sigma, double tau_c, double omega);

struct NoiseStreamKey {
  uint64_t seed = 0;
  uint64_t run = 0;
  uint64_t shot = 0;
};

/// Exact discrete OU recursion with stationary initialization covering [0, T].
/// Per-qubit streams derive from (seed, run, shot, qubit); with
/// correlated == true both qubits share the qubit-1 stream.
NoiseTrace sample_fast_trace(const FastNoiseModel& model, double total_time,
                             const NoiseStreamKey& key, bool correlated = true);

struct CoherentFieldModel {
  double amplitude = 0;  // rad/s detuning modulation depth
  double frequency_hz = 0;
  double phase = 0;      // rad
};

/// Deterministic sinusoidal detuning sampled at cell midpoints; identical
/// across shots, added to both qubits.
std::vector<double> coherent_field_cells(const CoherentFieldModel& model,
                                         double total_time, double dt);

/// Field whose sign flips exactly at the centers of a periodically spaced
/// pulse train: period twice the pulse spacing, zero crossings on the centers.
CoherentFieldModel synced_field(double amplitude, double pulse_spacing,
                                double first_center);

struct CalibrationOptions {
  int trace_count = 4000;
  int max_iterations = 80;
  double tolerance = 1e-3;  // on the contrast at the target time
};

/// Returns sigma such that the simulated free-induction Ramsey contrast
/// |E exp(i integral delta dt)| crosses 1/e at target_t2 (bisection over
/// fixed-seed Monte-Carlo estimates).
double calibrate_fast_noise(double target_t2, double tau_c,
                            const CalibrationOptions& opt = {});

struct NoiseSettings {
  enum class DriftMode { off, per_run, per_shot };
  DriftModel drift;
  DriftMode drift_mode = DriftMode::per_run;
  std::optional<FastNoiseModel> fast;
  bool fast_correlated = true;
  std::optional<CoherentFieldModel> coherent;
  double dt = 1e-6;

  bool shot_dependent() const {
    return drift_mode == DriftMode::per_shot || fast.has_value();
  }
};

/// Total detuning trace (drift + fast + coherent) for one shot of one run.
NoiseTrace compose_noise_trace(const NoiseSettings& settings, double total_time,
                               uint64_t seed, uint64_t run, uint64_t shot);

struct SpectrumEstimate {
  std::vector<double> freq_hz;
  std::vector<double> value;  // one-sided density, (rad/s)^2 / Hz
  double bin_width_hz = 0;
};

/// Averaged periodogram over equal-grid traces (qubit-2 samples, per-trace
/// mean removed, largest power-of-two prefix). Normalized so that
/// sum(value) * bin_width equals the sample variance.
SpectrumEstimate estimate_spectrum(const std::vector<NoiseTrace>& traces);

/// In-place radix-2 FFT (n must be a power of two); sign -1 forward.
void fft_radix2(std::vector<std::complex<double>>& data, int sign);

}  // namespace ddsim
