#ifndef FLOWPLAN_ERRORS_HPP
#define FLOWPLAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flowplan {

// Invalid arguments, config values or file contents. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File exists but cannot be interpreted at all.
class MalformedFileError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// File parses but carries an unsupported schema_version.
class SchemaVersionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Field evaluated too close to the terminal time where it is singular.
class SingularTimeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite loss or gradient during training; the step was aborted.
class DivergenceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite state during integration; carries the failing step index.
class IntegrationError : public ValidationError {
 public:
  IntegrationError(const std::string& what, int step)
      : ValidationError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Safety contract cannot be met or a certificate check failed. CLI exit code 2.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Constraint rows are provably unsatisfiable for any control input.
class InfeasibleError : public CertificateError {
 public:
  using CertificateError::CertificateError;
};

// Filesystem failure (missing file, unwritable path). CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flowplan

#endif  // FLOWPLAN_ERRORS_HPP
