#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvlab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad usage: out-of-range arguments, malformed specs, unknown ids.
/// Maps to CLI exit code 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

/// Evaluation hit a singular point or left a function's domain
/// (log of a non-positive value, division by a zero-valued jet,
/// metric determinant below the floor, ...).
class EvalError : public Error {
public:
    explicit EvalError(const std::string& msg) : Error(msg) {}
};

/// Syntax error from the expression parser; carries the byte offset
/// of the offending token.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : InputError(msg + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

} // namespace curvlab
