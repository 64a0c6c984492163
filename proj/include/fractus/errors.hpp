#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractus {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnsupportedOrderError : Error { using Error::Error; };
struct GridTooCoarseError : Error { using Error::Error; };
struct UnsupportedDomainError : Error { using Error::Error; };

// Picard or column solve did not reach tolerance. `column` is set by the
// tableau builder (-1 otherwise).
struct ConvergenceError : Error {
    double residual;
    long column;
    ConvergenceError(const std::string& what, double residual_, long column_ = -1)
        : Error(what), residual(residual_), column(column_) {}
};

// An iterate left the admissible state domain.
struct DomainExitError : Error {
    double time;
    DomainExitError(const std::string& what, double t) : Error(what), time(t) {}
};

struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off) : Error(what), offset(off) {}
};

struct UnknownIdentifierError : ParseError { using ParseError::ParseError; };

struct EvalError : Error { using Error::Error; };

// Problem-file error. `line` is 0 when the problem is a field invariant.
struct SpecError : Error {
    std::size_t line;
    std::string field;
    SpecError(const std::string& what, std::size_t line_, std::string field_)
        : Error(what), line(line_), field(std::move(field_)) {}
};

} // namespace fractus
