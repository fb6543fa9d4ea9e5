#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace newsgraph {

// Root of every error the library throws. The CLI maps the subclasses onto
// exit codes (config 1, data 2, numerical 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit a primitive; the message names the primitive and
// both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data. When the problem comes from a file the
// location is kept so callers can report it.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(message) {}
  DataError(std::string file, std::size_t line, std::string field, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": field '" + field + "': " + message),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
  std::string field_;
};

// Non-finite values where finite ones are required (loss, gradients).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace newsgraph
