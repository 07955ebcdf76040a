#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rde {

// Invalid user-supplied configuration; carries the offending field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Numerical-domain failure (non-symmetric / non-positive matrix, ...).
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bridge sampling exhausted its retry budget; carries the unit interval index.
class CouplingError : public std::runtime_error {
 public:
  CouplingError(std::int64_t interval, const std::string& what)
      : std::runtime_error(what + " (interval " + std::to_string(interval) + ")"),
        interval_(interval) {}
  std::int64_t interval() const noexcept { return interval_; }

 private:
  std::int64_t interval_;
};

// Estimator preconditions unmet (too few increments / classified paths).
class InsufficientData : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rde
