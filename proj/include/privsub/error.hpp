#pragma once

#include <stdexcept>
#include <string>

namespace privsub {

// Bad input: out-of-domain parameter, malformed schedule or config. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Numerical breakdown during a run (NaN/Inf on a path). Maps to CLI exit code 3.
class SimulationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace privsub
