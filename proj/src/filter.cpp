#include "ddsim/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ddsim/errors.hpp"
#include "ddsim/math_util.hpp"

namespace ddsim {

ToggleFunction toggle_from_sequence(const Sequence& seq) {
  ToggleFunction t;
  t.total_time = seq.total_time;
  t.switch_times.reserve(seq.pulses.size());
  for (const auto& p : seq.pulses) t.switch_times.push_back(p.center_time);
  return t;
}

double filter_value(const ToggleFunction& toggle, double omega) {
  if (omega < 0) throw std::invalid_argument("filter_value: omega < 0");
  const auto& sw = toggle.switch_times;
  if (std::abs(omega * toggle.total_time) < 1e-9) {
    // DC limit: (sum of signed segment lengths)^2
    double acc = 0, prev = 0, sign = 1;
    for (double s : sw) {
      acc += sign * (s - prev);
      prev = s;
      sign = -sign;
    }
    acc += sign * (toggle.total_time - prev);
    return acc * acc;
  }
  std::complex<double> y = 0;
  double prev = 0, sign = 1;
  const std::complex<double> iw(0.0, omega);
  auto seg = [&](double a, double b, double s) {
    y += s * (std::exp(iw * b) - std::exp(iw * a)) / iw;
  };
  for (double s : sw) {
    seg(prev, s, sign);
    prev = s;
    sign = -sign;
  }
  seg(prev, toggle.total_time, sign);
  return std::norm(y);
}

namespace {

struct Integrand {
  const ToggleFunction* toggle;
  const std::function<double(double)>* spectrum;

  double operator()(double w) const {
    const double s = (*spectrum)(w);
    if (!std::isfinite(s))
      throw IntegrationError("predict_coherence: non-finite spectrum sample");
    return s * filter_value(*toggle, w);
  }
};

// Adaptive Simpson with absolute tolerance budget per interval.
double adaptive_simpson(const Integrand& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    if (std::abs(delta) > 64.0 * tol)
      throw IntegrationError("predict_coherence: quadrature failed to converge");
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

CoherencePrediction predict_coherence(const ToggleFunction& toggle,
                                      const std::function<double(double)>& spectrum,
                                      double omega_min, double omega_max,
                                      double rel_tol) {
  if (!(omega_max > omega_min) || omega_min < 0)
    throw std::invalid_argument("predict_coherence: bad band limits");
  const Integrand f{&toggle, &spectrum};

  // Seed panels no wider than a quarter oscillation of the filter so the
  // adaptive pass never aliases over lobes.
  const double osc = pi / (2.0 * std::max(toggle.total_time, 1e-12));
  const double width = omega_max - omega_min;
  size_t panels = static_cast<size_t>(std::ceil(width / osc));
  panels = std::clamp<size_t>(panels, 32, 200000);
  const double h = width / static_cast<double>(panels);

  // First pass for the magnitude, then a refined pass against rel_tol.
  double coarse = 0;
  std::vector<double> fv(panels + 1);
  for (size_t i = 0; i <= panels; ++i) fv[i] = f(omega_min + h * i);
  for (size_t i = 0; i < panels; ++i)
    coarse += h / 6.0 * (fv[i] + 4.0 * f(omega_min + h * (i + 0.5)) + fv[i + 1]);

  const double tol_total = std::max(coarse, 1e-300) * rel_tol;
  double total = 0;
  for (size_t i = 0; i < panels; ++i) {
    const double a = omega_min + h * i, b = a + h;
    const double fm = f(0.5 * (a + b));
    const double whole = h / 6.0 * (fv[i] + 4.0 * fm + fv[i + 1]);
    total += adaptive_simpson(f, a, b, fv[i], fm, fv[i + 1], whole,
                              tol_total / static_cast<double>(panels), 24);
  }

  CoherencePrediction out;
  out.chi = total / two_pi;
  out.contrast = std::exp(-out.chi);
  return out;
}

std::vector<SpectrumProbePoint> probe_spectrum(std::span<const int> pulse_counts,
                                               double total_time,
                                               std::span<const double> contrasts) {
  if (pulse_counts.size() != contrasts.size())
    throw std::invalid_argument("probe_spectrum: size mismatch");
  if (total_time <= 0) throw std::invalid_argument("probe_spectrum: T <= 0");
  std::vector<SpectrumProbePoint> out(pulse_counts.size());
  for (size_t i = 0; i < pulse_counts.size(); ++i) {
    SpectrumProbePoint& pt = out[i];
    pt.freq_hz = pulse_counts[i] / (2.0 * total_time);
    pt.passband_width_hz = 1.0 / total_time;
    const double w = contrasts[i];
    if (!(w > 0.0) || w > 1.0 + 1e-9) {
      pt.usable = false;
      continue;
    }
    const double chi = -std::log(std::min(w, 1.0));
    pt.value = pi * pi * chi / (4.0 * total_time);
  }
  return out;
}

double probe_slope(std::span<const SpectrumProbePoint> points, double f_lo,
                   double f_hi) {
  std::vector<double> lx, ly;
  for (const auto& p : points) {
    if (!p.usable || p.freq_hz < f_lo || p.freq_hz > f_hi || p.value <= 0) continue;
    lx.push_back(std::log(p.freq_hz));
    ly.push_back(std::log(p.value));
  }
  return fit_line(lx, ly).slope;
}

}  // namespace ddsim
