#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamla {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is a 0-based byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& identifier, std::size_t position);
  const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::string identifier_;
};

/// Evaluation left the domain of a partial function (log, sqrt, division, pow).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Incompatible dimensions, orders, charts, ranks or component counts.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The configured jet order cannot supply the derivatives an operation needs.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A sampled axiom (Jacobi, anchor morphism, Poisson condition, ...) failed.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::vector<double> point = {});
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& message, std::vector<double> point = {});
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// Scenario document does not match the schema. `path` names the offending field.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

std::string format_point(const std::vector<double>& point);

}  // namespace hamla
