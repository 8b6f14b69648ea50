#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "ddsim/math_util.hpp"

namespace ddsim {

// Counter-style deterministic RNG. Every consumer derives its own stream from
// (seed, purpose, run, shot, qubit, ...) so results never depend on evaluation
// order or on how work is split across threads.
struct RngStream {
  uint64_t state = 0;

  RngStream() = default;
  explicit RngStream(uint64_t s) : state(s) {}

  uint64_t next_u64() {
    // splitmix64
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = two_pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

 private:
  double spare_ = 0;
  bool have_spare_ = false;
};

// Stream purposes; part of the stream key so distinct uses never collide.
enum class StreamPurpose : uint64_t {
  drift = 1,
  fast_noise = 2,
  readout = 3,
  generic = 4,
};

inline RngStream make_stream(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t h = seed ^ 0x9E3779B97F4A7C15ull;
  for (uint64_t x : path) {
    h ^= x + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    // one splitmix round per component
    uint64_t z = h + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    h = z ^ (z >> 31);
  }
  return RngStream(h);
}

}  // namespace ddsim
