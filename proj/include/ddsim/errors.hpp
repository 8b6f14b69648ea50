#pragma once

#include <stdexcept>
#include <string>

namespace ddsim {

// Error categories map to CLI exit codes: config 2, timing 3, calibration 4.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct TimingError : std::runtime_error {
  explicit TimingError(const std::string& m) : std::runtime_error(m) {}
};

struct ScheduleError : std::runtime_error {
  explicit ScheduleError(const std::string& m) : std::runtime_error(m) {}
};

struct CalibrationError : std::runtime_error {
  explicit CalibrationError(const std::string& m) : std::runtime_error(m) {}
};

struct IntegrationError : std::runtime_error {
  explicit IntegrationError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace ddsim
