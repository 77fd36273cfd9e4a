#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ridgetap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape or length mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter outside its documented range (k, eps, delta, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Matrix too large for the dense SVD path; callers should use a sketched path.
class DenseLimitError : public Error {
public:
    using Error::Error;
};

/// Numerically inconsistent inputs (e.g. a tail norm that comes out negative).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ridgetap
