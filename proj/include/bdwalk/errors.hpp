#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bdwalk {

/// Raised when a drift function leaves [0, 1/2) or is evaluated outside its
/// domain. Signals an invalid model rather than a numerical fault.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a birth-and-death chain has a non-positive rate where a
/// positive one is required.
class InvalidChain : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotNormalizable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration. `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace bdwalk
