#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uigen {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in markup or JSON input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line = 0, std::size_t column = 0)
        : Error(format(message, line, column)), message_(std::move(message)), line_(line), column_(column) {}

    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& m, std::size_t line, std::size_t col) {
        if (line == 0) return m;
        return "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + m;
    }
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

/// A value is well-formed but outside its domain (grid coordinate, palette index, token id...).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Token sequence that is not the encoding of any UI tree.
class DecodeError : public Error {
public:
    DecodeError(std::size_t position, std::string reason)
        : Error("decode error at position " + std::to_string(position) + ": " + reason),
          position_(position), reason_(std::move(reason)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t position_;
    std::string reason_;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MaskError : public Error {
public:
    using Error::Error;
};

/// Loss or gradient became non-finite during optimization.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace uigen
