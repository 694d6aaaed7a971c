#pragma once

#include <stdexcept>
#include <string>

namespace eclab {

/// Numerical failure (factorization, quadrature, series) as opposed to a
/// contract violation. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration parse or validation failure. The CLI maps these to exit
/// code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eclab
