#pragma once

#include <stdexcept>
#include <string>

namespace qdiff {

// Invalid experiment or lattice configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical diagnostic exceeded its hard limit during a run. Maps to exit code 3.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  explicit NumericError(const std::string& what)
      : std::runtime_error(what), time_(-1.0) {}

  // Simulation time at which the breach was detected, or -1 when not tied to a time.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// File system or stream failure. Maps to exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdiff
