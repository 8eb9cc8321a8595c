#ifndef SITREP_ERROR_H_
#define SITREP_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sitrep {

// Base for every error raised by the library. Anything deriving from Error
// describes bad input or configuration; other std::exception types are bugs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input value. `field` and `row` locate the offending datum when known.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message,
                           std::optional<std::string> field = std::nullopt,
                           std::optional<std::size_t> row = std::nullopt);

  const std::optional<std::string>& field() const { return field_; }
  const std::optional<std::size_t>& row() const { return row_; }

 private:
  std::optional<std::string> field_;
  std::optional<std::size_t> row_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Graph structure violation, e.g. a cycle.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace sitrep

#endif  // SITREP_ERROR_H_
