#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfgs {

/// Bad dimensions, malformed probability data, or invalid solver settings.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A cost formula was evaluated outside its numeric domain
/// (e.g. a logarithmic term at a boundary transition probability).
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Problem size outside the supported range of an operation.
class UnsupportedSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iteration budget exhausted before the requested tolerance was met.
/// Carries the last residual and, when available, the residual history.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double residual,
                     std::vector<double> history = {})
      : std::runtime_error(what),
        residual_(residual),
        history_(std::move(history)) {}

  double residual() const noexcept { return residual_; }
  const std::vector<double>& residual_history() const noexcept {
    return history_;
  }

 private:
  double residual_;
  std::vector<double> history_;
};

}  // namespace mfgs
