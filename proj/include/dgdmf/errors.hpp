#pragma once

#include <stdexcept>
#include <string>

namespace dgdmf {

/// Operand shapes do not conform (e.g. inner dimensions of a product).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition on the mathematical domain was violated
/// (degenerate factors, omega >= 1/2, invalid graph parameters, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative kernel failed to converge, or a numerical identity that
/// must hold to rounding was violated.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dgdmf
