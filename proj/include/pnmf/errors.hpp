#pragma once

#include <stdexcept>
#include <string>

namespace pnmf {

/// Base class for all pnmf errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument or malformed input (dimension mismatch, negative entries, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Input is structurally valid but degenerate for the requested operation
/// (constant series, empty sample set, ...).
class DegenerateInputError : public ValidationError {
public:
    explicit DegenerateInputError(const std::string& what) : ValidationError(what) {}
};

/// File / parse failures. Carries no errno; the message embeds path and line.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// An iterative routine exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace pnmf
