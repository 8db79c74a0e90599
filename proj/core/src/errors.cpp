#include "dcpl/errors.hpp"

#include <utility>

namespace dcpl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::spec: return "spec";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::start_point: return "start_point";
    case ErrorKind::inversion: return "inversion";
    case ErrorKind::contract: return "contract";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::degenerate_transform: return "degenerate_transform";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

DataError::DataError(ErrorKind kind, const std::string& message,
                     std::size_t row, std::string column)
    : Error(kind, message), row_(row), column_(std::move(column)) {}

EvaluationError::EvaluationError(const std::string& message,
                                 std::size_t person, std::size_t task)
    : Error(ErrorKind::evaluation, message), person_(person), task_(task) {}

InversionError::InversionError(const std::string& message, double rcond)
    : Error(ErrorKind::inversion, message), rcond_(rcond) {}

}  // namespace dcpl
