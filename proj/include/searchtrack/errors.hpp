#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace searchtrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    /// Short machine-readable category, e.g. "parse-error".
    [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// Agent and target occupy the same point, so bearing is undefined.
class CoincidentPositions : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "coincident-positions"; }
};

class SingularCovariance : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "singular-covariance"; }
};

/// A parameter set or scenario violates one of its invariants.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const char* kind() const noexcept override { return "validation-error"; }

private:
    std::string field_;
};

/// Malformed scenario document. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    [[nodiscard]] const char* kind() const noexcept override { return "parse-error"; }

private:
    std::size_t line_;
    std::size_t column_;
};

class InfeasibleSeparation : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "infeasible-separation"; }
};

class IoError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "io-error"; }
};

}  // namespace searchtrack
