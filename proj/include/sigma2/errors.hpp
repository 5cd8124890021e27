#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigma2 {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix argument is outside the Garding cone a function requires.
class ConeMembershipError : public Error {
 public:
  ConeMembershipError(std::string argument, int level, double sigma_value)
      : Error("cone membership violated: argument '" + argument + "' is not in Gamma_" +
              std::to_string(level) + "+ (sigma_" + std::to_string(level) + " = " +
              std::to_string(sigma_value) + ")"),
        argument_(std::move(argument)),
        level_(level) {}

  const std::string& argument() const noexcept { return argument_; }
  int level() const noexcept { return level_; }

 private:
  std::string argument_;
  int level_;
};

/// Pointwise admissibility summary of a conformal factor.
struct AdmissibilityReport {
  bool admissible = true;
  double min_sigma1 = 0.0;
  double min_sigma2 = 0.0;
  std::size_t worst_node = 0;
};

/// A conformal factor (or space-time path) left the admissible cone.
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, AdmissibilityReport report)
      : Error(what + ": min sigma1 = " + std::to_string(report.min_sigma1) +
              ", min sigma2 = " + std::to_string(report.min_sigma2) + " at node " +
              std::to_string(report.worst_node)),
        report_(report) {}

  const AdmissibilityReport& report() const noexcept { return report_; }

 private:
  AdmissibilityReport report_;
};

/// u_tt <= 0 somewhere where a strictly convex-in-time path is required.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

/// Failures of the geodesic continuation solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

class ContinuationStallError : public SolverError {
 public:
  ContinuationStallError(double smallest_s, const std::string& detail)
      : SolverError("continuation stalled at s = " + std::to_string(smallest_s) + ": " + detail),
        smallest_s_(smallest_s) {}
  double smallest_s() const noexcept { return smallest_s_; }

 private:
  double smallest_s_;
};

class NewtonDivergenceError : public SolverError {
 public:
  NewtonDivergenceError(double s, std::vector<double> history)
      : SolverError("Newton iteration failed to converge at s = " + std::to_string(s) +
                    " after " + std::to_string(history.size()) + " iterations"),
        history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class AdmissibilityLossError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Adaptive flow stepping could not find an acceptable step.
class StepUnderflowError : public Error {
 public:
  StepUnderflowError(double t, double dt)
      : Error("flow step size underflow (dt = " + std::to_string(dt) + ") at t = " +
              std::to_string(t)),
        t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace sigma2
