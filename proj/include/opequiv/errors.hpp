#pragma once

#include <stdexcept>
#include <string>

namespace opequiv {

// Precondition or contract violated by the caller (bad interval, moving absent mass, ...).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Query that is undefined on its argument (empty measure, zero operator).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Finite cardinal arithmetic left the 64-bit range.
struct CapacityError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

// Input that cannot be parsed or lies outside the representable class.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace opequiv
