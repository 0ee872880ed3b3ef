#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace janus {

/// Base of every exception raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
struct ShapeError : Error {
    using Error::Error;
};

/// A factorization met a (numerically) dependent column.
struct DegeneracyError : Error {
    DegeneracyError(const std::string& what, std::size_t column = npos) : Error(what), column(column) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t column;  // offending column, or npos when not tied to one
};

/// Non-finite values, failed pivots and similar breakdowns.
struct NumericalError : Error {
    using Error::Error;
};

/// A call sequence or identifier violates the component's protocol.
struct ProtocolError : Error {
    using Error::Error;
};

/// Bad configuration key or value.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace janus
