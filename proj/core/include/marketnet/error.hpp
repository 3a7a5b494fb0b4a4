#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marketnet {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, matrix shapes, arguments).
class InputError : public Error {
 public:
  using Error::Error;
};

// An iterative method ran out of iterations before meeting its tolerance.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

}  // namespace marketnet
