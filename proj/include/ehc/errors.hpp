#ifndef EHC_ERRORS_HPP
#define EHC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ehc {

// Parameter outside the mathematical domain of an operation (negative energy,
// probability outside (0,1], ...).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A policy asked for more energy than the battery holds. Always a bug.
class FeasibilityError : public std::logic_error {
public:
  explicit FeasibilityError(const std::string& what) : std::logic_error(what) {}
};

// Malformed configuration (JSON shape, unknown kind, empty grid).
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace ehc

#endif  // EHC_ERRORS_HPP
