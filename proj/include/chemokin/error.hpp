#pragma once

#include <stdexcept>
#include <string>

namespace chemokin {

/// Invalid parameters, unknown config keys, violated step-size limits.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// NaN in an observable, negative mass, or a blown stability limit at runtime.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Step-size violation. Raised at configuration time, so it is a ConfigError,
/// but the CLI reports it with the numerical-failure exit code.
class CflError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

}  // namespace chemokin
