#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cohortflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed CSV or JSON input. `line()` is 0 when no line applies.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message, std::size_t line = 0)
        : Error(message), line_{line} {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A value breaks a domain invariant (row sums, negative counts, bad state space).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Snapshot or trajectory structure cannot be interpreted (term gaps, early absorption).
class StructureError : public Error {
public:
    using Error::Error;
};

/// A scenario references an unknown state or over-commits a row.
class ScenarioError : public Error {
public:
    using Error::Error;
};

/// Caller supplied an argument outside the operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

} // namespace cohortflow
