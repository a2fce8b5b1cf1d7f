#pragma once

#include <stdexcept>
#include <string>

namespace bouquet {

// Error taxonomy shared across the library.  Every failure mode raised by a
// precondition check maps onto one of these; numerical routines throw
// NumericError only when a computation cannot be completed (no silent NaNs).

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched generator counts, matrix shapes, or chart dimensions.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// An input whose even/odd grading does not match what the operation needs.
struct ParityError : Error {
    explicit ParityError(const std::string& msg) : Error(msg) {}
};

// A point left the chart box, or an evaluation outside the declared domain.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// A declared structure failed its numerical validation (fixed stratum,
// equivariant loop closure, Ad-invariance, ...).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Supplied analytic data disagrees with its finite-difference cross-check.
struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& msg) : Error(msg) {}
};

// An iteration failed to converge or a matrix was numerically singular.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed input files; `where` carries a JSON-pointer-style location.
struct SchemaError : Error {
    SchemaError(const std::string& where, const std::string& msg)
        : Error(where + ": " + msg), location(where) {}
    std::string location;
};

} // namespace bouquet
