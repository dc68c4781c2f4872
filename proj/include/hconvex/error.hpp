#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hconvex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the problem.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation left the domain of a primitive (log of a negative, division by zero, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The geometry at the requested point is not usable: rank deficiency,
/// indefinite metric, shooting failure, degenerate plane, ...
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Bad arguments to an API call (dimension mismatch, out-of-range k, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace hconvex
