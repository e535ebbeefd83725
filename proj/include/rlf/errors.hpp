#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rlf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A pivot fell below the relative threshold during elimination.
class SingularMatrix : public Error {
public:
  using Error::Error;
};

/// An implicit step did not reach its residual tolerance.
class NoConvergence : public Error {
public:
  NoConvergence(int iterations, double residual)
      : Error("implicit solve did not converge after " + std::to_string(iterations) +
              " iterations (residual " + format_residual(residual) + ")"),
        iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  static std::string format_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
  }
  double residual() const noexcept { return residual_; }

private:
  int iterations_;
  double residual_;
};

/// Invalid user input: configuration, step size, file contents.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A solver failure annotated with the step at which it happened.
class StepFailure : public Error {
public:
  StepFailure(std::size_t step, const std::string& cause)
      : Error("step " + std::to_string(step) + ": " + cause), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

} // namespace rlf
