#pragma once

#include <stdexcept>
#include <string>

namespace czsim {

/// Invalid device parameters or study configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested value outside the physically reachable range.
struct OutOfRangeError : std::runtime_error {
  explicit OutOfRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Adaptive state tracking could not resolve a crossing within the depth limit.
struct TrackingAmbiguousError : std::runtime_error {
  TrackingAmbiguousError(const std::string& msg, double freq_mhz)
      : std::runtime_error(msg), frequency_mhz(freq_mhz) {}
  double frequency_mhz;
};

struct NoSignChangeError : std::runtime_error {
  explicit NoSignChangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Every grid point is a root (non-interacting device).
struct DegenerateFlatError : std::runtime_error {
  explicit DegenerateFlatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceFailureError : std::runtime_error {
  explicit ConvergenceFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnreachableError : std::runtime_error {
  explicit UnreachableError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientPeaksError : std::runtime_error {
  explicit InsufficientPeaksError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitDegenerateError : std::runtime_error {
  explicit FitDegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientPhysicalSamplesError : std::runtime_error {
  explicit InsufficientPhysicalSamplesError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace czsim
