#pragma once

#include <stdexcept>
#include <string>

namespace covop {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Invalid user-facing inputs: bad model parameters, malformed configs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed (non-convergence, indefinite operator, ...).
// Carries enough context to diagnose; never swallowed.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covop
