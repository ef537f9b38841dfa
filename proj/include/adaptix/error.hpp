#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adaptix {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input vectors or points whose dimension does not match the model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the documented domain (negative lambda, duplicate
/// design points, point outside the unit ball, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced during an iterative solve.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace adaptix
