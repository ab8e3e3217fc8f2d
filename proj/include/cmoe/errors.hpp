#pragma once

#include <stdexcept>
#include <string>

namespace cmoe {

// Error taxonomy shared by every module. Callers that need to map failures to
// exit codes (the CLI) dispatch on these types.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidDimension : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class PositivityError : public std::runtime_error {
 public:
  PositivityError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double deficit)
      : std::runtime_error(what + " (trace deficit " + std::to_string(deficit) + ")"),
        deficit_(deficit) {}
  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

// A numerically observed violation of a claimed inequality. These are
// verification failures, not programming errors.
struct LemmaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SaturationViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cmoe
