#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace diffcert {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntax error with the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& msg)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation left the domain of a coefficient expression (division by zero,
/// log of a non-positive number, overflow to infinity, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its stated precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Ellipticity failed at a concrete point: sigma*sigma^T is not positive
/// definite in the probed direction. Carries the witness so the caller can
/// reproduce the violation.
class EllipticityError : public Error {
public:
    EllipticityError(std::vector<double> witness, double value, const std::string& msg)
        : Error(msg), witness_(std::move(witness)), value_(value) {}
    const std::vector<double>& witness() const { return witness_; }
    double value() const { return value_; }

private:
    std::vector<double> witness_;
    double value_;
};

} // namespace diffcert
