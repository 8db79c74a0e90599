#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcpl {

enum class ErrorKind {
  schema,
  validation,
  parse,
  spec,
  evaluation,
  domain,
  config,
  start_point,
  inversion,
  contract,
  ordering,
  degenerate_transform,
  io,
};

std::string_view to_string(ErrorKind kind);

// Base of every error the library throws. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the loaders; row is the 1-based line number in the source file
// (header is line 1), column is empty when the problem is not cell-specific.
class DataError : public Error {
 public:
  DataError(ErrorKind kind, const std::string& message, std::size_t row = 0,
            std::string column = {});
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// A likelihood evaluation produced a non-finite value. person/task are
// 0-based; task is npos when the failure is person-level.
class EvaluationError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  EvaluationError(const std::string& message, std::size_t person,
                  std::size_t task = npos);
  std::size_t person() const noexcept { return person_; }
  std::size_t task() const noexcept { return task_; }

 private:
  std::size_t person_;
  std::size_t task_;
};

class InversionError : public Error {
 public:
  InversionError(const std::string& message, double rcond);
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

}  // namespace dcpl
