#pragma once

#include <stdexcept>
#include <string>

namespace spectral {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Frequencies outside (0, pi] or duplicated.
class InvalidFrequencyError : public Error {
public:
    using Error::Error;
};

/// Too few samples for the requested operation.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Matrix shapes that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient or numerically singular least-squares design.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Inputs without the information an operation needs (zero variance, zero energy).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset or model files.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace spectral
