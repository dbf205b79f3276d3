#pragma once

#include <stdexcept>
#include <string>

namespace spinesim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown model id, missing or out-of-range parameter. The message names the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoClosedForm : public Error {
 public:
  explicit NoClosedForm(const std::string& model)
      : Error{"model '" + model + "' has no closed-form mean; use mean_population_mc"} {}
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Raised when a proposed biased rate exceeds the thinning majorant.
class ThinningBoundViolated : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinesim
