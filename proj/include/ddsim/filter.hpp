#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ddsim/sequences.hpp"

namespace ddsim {

// ---------------------------------------------------------------------------
// Filter-function formalism in the instantaneous-pulse idealization: the
// toggling sign y(t) flips at each pulse center, F(w) = |int y(t) e^{iwt} dt|^2
// and the predicted decay exponent is chi = (1/2pi) int S(w) F(w) dw for a
// one-sided angular-frequency spectrum S.
// ---------------------------------------------------------------------------

struct ToggleFunction {
  double total_time = 0;
  std::vector<double> switch_times;  // strictly increasing, inside [0, T]
};

/// Switch times = pulse center times.
ToggleFunction toggle_from_sequence(const Sequence& seq);

/// |int_0^T y(t) e^{iwt} dt|^2 in closed form from the constant segments.
double filter_value(const ToggleFunction& toggle, double omega);

struct CoherencePrediction {
  double chi = 0;       // decay exponent, >= 0
  double contrast = 1;  // exp(-chi)
};

/// Overlap integral of the filter with a spectrum over [omega_min, omega_max]
/// by adaptive quadrature (relative tolerance rel_tol). Throws
/// IntegrationError on non-finite integrand samples or non-convergence.
CoherencePrediction predict_coherence(const ToggleFunction& toggle,
                                      const std::function<double(double)>& spectrum,
                                      double omega_min, double omega_max,
                                      double rel_tol = 1e-6);

struct SpectrumProbePoint {
  double freq_hz = 0;            // passband center N/(2T)
  double value = 0;              // estimated S(w) at the passband
  double passband_width_hz = 0;  // ~1/T
  bool usable = true;
};

/// Invert measured/simulated contrasts of CPMG-timed sequences under the
/// narrow-passband approximation: S(w0) ~ pi^2 (-ln W) / (4 T) at
/// w0 = pi N / T. Points with contrast <= 0 are flagged unusable.
std::vector<SpectrumProbePoint> probe_spectrum(std::span<const int> pulse_counts,
                                               double total_time,
                                               std::span<const double> contrasts);

/// Log-log slope of usable probe points within [f_lo, f_hi].
double probe_slope(std::span<const SpectrumProbePoint> points, double f_lo,
                   double f_hi);

}  // namespace ddsim
