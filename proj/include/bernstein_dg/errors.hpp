#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bdg {

// Argument errors are reported with std::invalid_argument throughout.

/// A computation that is well posed in exact arithmetic failed numerically
/// (singular matrix, degenerate annihilation stencil).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A reference-solution oracle could not produce a value (e.g. Newton on the
/// characteristic equation did not converge close to the break time).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite nodal values appeared during time integration.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, std::size_t element)
      : std::runtime_error("solution blew up at t=" + std::to_string(time) +
                           " in element " + std::to_string(element)),
        time_(time),
        element_(element) {}

  double time() const noexcept { return time_; }
  std::size_t element() const noexcept { return element_; }

 private:
  double time_;
  std::size_t element_;
};

}  // namespace bdg
