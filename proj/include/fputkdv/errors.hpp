#pragma once

#include <stdexcept>
#include <string>

namespace fputkdv {

/// Raised when an integration produces NaN or Inf. Carries the time of the
/// offending step so long runs can report where they blew up.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Spectral solution has significant energy in the top third of its modes.
class AliasingDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation requested outside the time range a wave family was built for.
class DomainExceeded : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace fputkdv
