#pragma once

#include <stdexcept>
#include <string>

namespace phasetop {

/// Invalid user input: mesh files, configuration, CLI arguments.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LinearSolveFailure : public SolverError {
 public:
  LinearSolveFailure(const std::string& what, int iterations, double residual)
      : SolverError(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

class MaxIterations : public SolverError {
 public:
  MaxIterations(const std::string& what, int iterations, double residual)
      : SolverError(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

}  // namespace phasetop
