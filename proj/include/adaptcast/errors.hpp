#pragma once

#include <stdexcept>
#include <string>

namespace adaptcast {

// Error taxonomy. The CLI maps each family onto an exit code:
// ConfigError -> 2, DataError family -> 3, NumericError -> 4.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed input text; carries the 1-based CSV row when known.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t row)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

class EvaluationError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace adaptcast
