#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ddsim/spin_core.hpp"

namespace ddsim {

enum class SequenceFamily { empty, cpmg_yy, cpmg_xy, pdd_xy, ccpmg, custom };

std::string to_string(SequenceFamily f);
SequenceFamily family_from_string(std::string_view s);

/// A validated, time-ordered pulse schedule over a total window T.
///
/// CPMG-timed families (cpmg_yy, cpmg_xy, ccpmg) have free gaps
/// tau, 2tau, ..., 2tau, tau with tau = (T - N*t_pi)/(2N); pdd_xy has N+1
/// equal gaps of (T - N*t_pi)/(N+1). Pulse center times mark the ideal
/// instants of the timing family; finite durations extend symmetrically.
class Sequence {
 public:
  SequenceFamily family = SequenceFamily::empty;
  int level = 0;  // concatenation level for ccpmg, 0 otherwise
  std::vector<PulseEvent> pulses;
  double total_time = 0;    // s
  double base_interval = 0; // tau, s
  TargetSet targets = TargetSet::both();

  int pulse_count() const { return static_cast<int>(pulses.size()); }
};

// Pulse alphabet: Y rotates anticlockwise about y, Xbar clockwise about x.
inline constexpr double y_phase = pi / 2;
inline constexpr double y_angle = pi;
inline constexpr double xbar_phase = 0.0;
inline constexpr double xbar_angle = -pi;

/// Carr-Purcell timing with all-Y pulses (yy) or alternating Y/Xbar (xy,
/// starting with Y; even pulse count required). n_pulses == 0 yields the
/// empty sequence (one free gap of length T).
Sequence build_cpmg(int n_pulses, double total_time, double t_pi,
                    SequenceFamily phase_mode, TargetSet targets);

/// Periodic timing: N+1 equal free gaps; phases alternate starting with Xbar.
Sequence build_pdd(int n_pulses, double total_time, double t_pi, TargetSet targets);

/// Recursive token tree over the alphabet {tau, Y, Xbar, block, repeat}.
struct SequenceSymbol {
  enum class Kind { delay, pulse, block };
  Kind kind = Kind::delay;
  double phase = 0, angle = 0;           // pulse payload
  int repeat = 1;                        // block payload
  std::vector<SequenceSymbol> children;  // block payload

  static SequenceSymbol tau() { return {}; }
  static SequenceSymbol pulse(double phase, double angle) {
    SequenceSymbol s;
    s.kind = Kind::pulse;
    s.phase = phase;
    s.angle = angle;
    return s;
  }
  static SequenceSymbol block(std::vector<SequenceSymbol> children, int repeat) {
    SequenceSymbol s;
    s.kind = Kind::block;
    s.children = std::move(children);
    s.repeat = repeat;
    return s;
  }
};

/// Flattened token stream: per pulse the number of tau units since the
/// previous pulse (adjacent delay tokens merge additively).
struct FlatSequence {
  struct FlatPulse {
    double phase = 0, angle = 0;
    int gap_units_before = 0;
  };
  std::vector<FlatPulse> pulses;
  int trailing_gap_units = 0;
  int delay_token_count = 0;

  int total_gap_units() const;
};

FlatSequence flatten(const SequenceSymbol& root);

/// Concatenated-CPMG token tree for level n >= 1. Level 1 is
/// [tau Y tau tau Xbar tau]^2; higher levels embed the previous level between
/// framing pulses, with the half block being a single repetition of the
/// previous level's bracketed content. Flattened pulse count is
/// (4^(n+1) - 4)/3.
SequenceSymbol expand_ccpmg(int level);

/// Closed-form ccpmg pulse count.
long ccpmg_pulse_count(int level);

/// Flatten expand_ccpmg(level) onto CPMG timing over [0, T].
Sequence schedule_ccpmg(int level, double total_time, double t_pi, TargetSet targets);

/// Structured pass/fail diagnostics; never throws.
struct SequenceDiagnostics {
  struct Check {
    std::string name;
    bool pass = true;
    std::string detail;
  };
  std::vector<Check> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check* find(std::string_view name) const;
};

SequenceDiagnostics validate(const Sequence& seq);

/// Line-oriented text form; numeric fields use shortest round-trip precision
/// so serialize/parse is bit-exact.
std::string serialize_sequence(const Sequence& seq);
Sequence parse_sequence(std::string_view text);

}  // namespace ddsim
