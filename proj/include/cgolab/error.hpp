#pragma once

#include <stdexcept>
#include <string>

namespace cgolab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition or invariant was violated by the caller's inputs.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An iterative or direct solve failed; carries the last relative residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (relative residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Malformed configuration or field file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace cgolab
