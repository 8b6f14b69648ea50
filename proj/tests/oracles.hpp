#pragma once

// Test-only reference implementations, kept independent of the library's
// propagation path: a scaling-and-squaring Taylor matrix exponential and
// composite Gauss-Legendre quadrature.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracles {

/// exp(M) by Taylor series with scaling and squaring.
inline Eigen::Matrix4cd expm_taylor(Eigen::Matrix4cd m) {
  const double norm = m.cwiseAbs().maxCoeff() * 4.0;
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.25) ++s;
  m /= std::pow(2.0, s);
  Eigen::Matrix4cd sum = Eigen::Matrix4cd::Identity();
  Eigen::Matrix4cd term = Eigen::Matrix4cd::Identity();
  for (int k = 1; k < 40; ++k) {
    term = (term * m / static_cast<double>(k)).eval();
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-22) break;
  }
  for (int k = 0; k < s; ++k) sum = (sum * sum).eval();
  return sum;
}

/// exp(-i H t) through the Taylor route.
inline Eigen::Matrix4cd expm_hamiltonian(const Eigen::Matrix4cd& h, double t) {
  return expm_taylor(std::complex<double>(0.0, -t) * h);
}

/// Composite 20-point Gauss-Legendre over [a, b] with n panels.
inline double gauss_legendre(const std::function<double(double)>& f, double a,
                             double b, int panels) {
  static const double xs[10] = {0.0765265211334973, 0.2277858511416451,
                                0.3737060887154195, 0.5108670019508271,
                                0.6360536807265150, 0.7463319064601508,
                                0.8391169718222188, 0.9122344282513259,
                                0.9639719272779138, 0.9931285991850949};
  static const double ws[10] = {0.1527533871307258, 0.1491729864726037,
                                0.1420961093183820, 0.1316886384491766,
                                0.1181945319615184, 0.1019301198172404,
                                0.0832767415767048, 0.0626720483341091,
                                0.0406014298003869, 0.0176140071391521};
  double total = 0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    double acc = 0;
    for (int i = 0; i < 10; ++i)
      acc += ws[i] * (f(mid - half * xs[i]) + f(mid + half * xs[i]));
    total += acc * half;
  }
  return total;
}

/// |int_0^T y(t) e^{iwt} dt|^2 by quadrature of the defining integral.
inline double filter_by_quadrature(const std::vector<double>& switches, double total,
                                   double omega) {
  std::complex<double> acc = 0;
  double prev = 0, sign = 1;
  auto piece = [&](double a, double b, double s) {
    // enough panels that each spans well under a quarter oscillation
    const int panels =
        std::max(4, static_cast<int>(std::ceil(omega * (b - a) / 1.5)) + 4);
    double re = oracles::gauss_legendre(
        [&](double t) { return std::cos(omega * t); }, a, b, panels);
    double im = oracles::gauss_legendre(
        [&](double t) { return std::sin(omega * t); }, a, b, panels);
    acc += s * std::complex<double>(re, im);
  };
  for (double s : switches) {
    piece(prev, s, sign);
    prev = s;
    sign = -sign;
  }
  piece(prev, total, sign);
  return std::norm(acc);
}

}  // namespace oracles
