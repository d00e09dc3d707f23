#pragma once

#include <stdexcept>
#include <string>

namespace ihdg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Inconsistent or degenerate mesh connectivity/geometry.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Invalid variant/degree combination or missing problem data.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnsupportedDegree : public Error {
public:
    using Error::Error;
};

class LinearAlgebraError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced while evaluating user data or the nonlinearity.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_increment)
        : Error(what), last_increment_(last_increment)
    {
    }
    [[nodiscard]] double last_increment() const noexcept { return last_increment_; }

private:
    double last_increment_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ihdg
