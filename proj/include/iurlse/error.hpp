#pragma once

#include <stdexcept>
#include <string>

namespace iurlse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates its documented range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Kernel matrix could not be factorized even after the maximum jitter.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Raised by density() on an estimated-shift law; callers must go through
/// the predictive density instead.
class PredictiveRequired : public Error {
public:
    using Error::Error;
};

/// The likelihood/prior pair has no closed-form predictive; the caller has to
/// marginalize by Monte Carlo.
class UnsupportedConjugatePair : public Error {
public:
    using Error::Error;
};

}  // namespace iurlse
