#pragma once

#include <stdexcept>
#include <string>

namespace parabctl {

/// Raised when a model or controller parameter violates its domain
/// (nonpositive gain, even node count, p <= 1, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a certificate quantity is requested outside the set where its
/// closed form is defined, e.g. zeta_bar at an inadmissible omega.
class CertificatePrecondition : public std::domain_error {
 public:
  explicit CertificatePrecondition(const std::string& what) : std::domain_error(what) {}
};

/// Raised by the scenario parser; the CLI maps it to exit code 64.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parabctl
