#pragma once

#include <stdexcept>
#include <string>

namespace flexpath {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

/// A rotation sample failed the orthogonality / handedness check.
class InvalidRotation : public Error {
public:
    using Error::Error;
};

/// Singular system, failed factorization or non-finite solution.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw InvalidArgument(message);
    }
}

} // namespace detail
} // namespace flexpath
