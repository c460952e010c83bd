#pragma once

#include <stdexcept>
#include <string>

namespace attrition {

// Error taxonomy mirrored by the CLI exit codes:
// usage/configuration -> 2, file format -> 3, numeric/degeneracy -> 4.

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Covariance row with z*m == 0; carries the offending unit name.
struct DegenerateMetricError : NumericError {
  std::string unit;
  explicit DegenerateMetricError(const std::string& unit_name)
      : NumericError("degenerate metric: zero noise amplitude for unit " + unit_name),
        unit(unit_name) {}
};

}  // namespace attrition
