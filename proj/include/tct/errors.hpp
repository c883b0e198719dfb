#pragma once

#include <stdexcept>
#include <string>

namespace tct {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid inputs: bad dimensions, violated preconditions, malformed
/// configuration. Maps to CLI exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure on otherwise valid inputs: singular cross-trial
/// design, degenerate (zero-variance) detection signal.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A processing stage produced no usable output (all events dropped,
/// all epochs rejected).
class EmptyResultError : public Error {
public:
    using Error::Error;
};

/// File and format problems.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tct
