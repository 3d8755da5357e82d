#include "hamla/errors.hpp"

#include <charconv>

namespace hamla {

ParseError::ParseError(const std::string& message, std::size_t position)
    : Error(message + " at position " + std::to_string(position)), position_(position) {}

UnknownIdentifierError::UnknownIdentifierError(const std::string& identifier, std::size_t position)
    : ParseError("unknown identifier '" + identifier + "'", position), identifier_(identifier) {}

ValidationError::ValidationError(const std::string& message, std::vector<double> point)
    : Error(point.empty() ? message : message + " at " + format_point(point)), point_(std::move(point)) {}

PreconditionError::PreconditionError(const std::string& message, std::vector<double> point)
    : Error(point.empty() ? message : message + " at " + format_point(point)), point_(std::move(point)) {}

SchemaError::SchemaError(const std::string& path, const std::string& message)
    : Error(path.empty() ? message : path + ": " + message), path_(path) {}

std::string format_point(const std::vector<double>& point) {
  std::string out = "(";
  char buf[64];
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (i) out += ", ";
    auto res = std::to_chars(buf, buf + sizeof buf, point[i]);
    out.append(buf, res.ptr);
  }
  out += ")";
  return out;
}

}  // namespace hamla
