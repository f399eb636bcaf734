#pragma once

#include <stdexcept>
#include <string>

namespace whitefem {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad sizes, out-of-domain points, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed: singular systems, nonconvergence, bracket failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration is malformed. Carries the offending field name.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace whitefem
