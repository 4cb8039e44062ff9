#pragma once

#include <stdexcept>
#include <string>

namespace solsel {

// Base class for every error raised by the library. Subclasses name the
// failure category so callers (and the CLI) can report it precisely.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructuralError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class ComparisonError : public Error { using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace solsel
