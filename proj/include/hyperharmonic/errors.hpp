/**
 * Error categories shared by every module.
 *
 * Each category maps onto one process exit code of the command-line tool, so
 * library callers and the CLI agree on how a failure is classified.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace hyperharmonic {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Bad arguments, malformed input data, violated preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Eigensolver failures, non positive-definite matrices, undefined estimates.
class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// The requested problem exceeds a configured size limit.
class CapacityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

namespace detail {

template <typename E = ValidationError>
inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw E(message);
}

}  // namespace detail
}  // namespace hyperharmonic
