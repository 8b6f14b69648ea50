#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ddsim {

/// Per-qubit detuning samples on a uniform grid covering [0, duration].
/// The value of cell k applies on [k*dt, (k+1)*dt). Cells hold the *total*
/// detuning (drift offset + fast noise + coherent field); the realized drift
/// offsets are kept alongside for bookkeeping.
struct NoiseTrace {
  double dt = 0;
  std::vector<double> delta1;  // rad/s, qubit 1
  std::vector<double> delta2;  // rad/s, qubit 2
  double drift1 = 0;           // rad/s, realized per-run offset
  double drift2 = 0;
  uint64_t seed = 0;           // seed path bookkeeping
  uint64_t shot = 0;

  double duration() const { return dt * static_cast<double>(delta1.size()); }

  /// Detuning of the addressed qubit at time t (clamped to the last cell).
  double value1_at(double t) const { return delta1[cell_index(t)]; }
  double value2_at(double t) const { return delta2[cell_index(t)]; }

  size_t cell_index(double t) const {
    if (delta1.empty()) throw std::invalid_argument("NoiseTrace: empty trace");
    auto k = static_cast<long>(t / dt);
    if (k < 0) k = 0;
    const long n = static_cast<long>(delta1.size());
    if (k >= n) k = n - 1;
    return static_cast<size_t>(k);
  }

  /// Constant detunings over [0, total_time]; single cell.
  static NoiseTrace constant(double total_time, double d1, double d2) {
    NoiseTrace tr;
    tr.dt = total_time > 0 ? total_time : 1.0;
    tr.delta1 = {d1};
    tr.delta2 = {d2};
    tr.drift1 = d1;
    tr.drift2 = d2;
    return tr;
  }
};

}  // namespace ddsim
