#pragma once

#include <stdexcept>
#include <string>

namespace dqnlab {

// Base of every error raised by the library. Callers that only need
// "something went wrong" can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector/matrix lengths disagree with what an operation expects.
class ShapeError : public Error {
public:
    using Error::Error;
};

// An argument is out of its allowed range (delta <= 0, probability > 1, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class InvalidStateError : public Error {
public:
    using Error::Error;
};

// Configuration failed validation. `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Market data problems: schema, ordering, parse failures, short series.
class DataError : public Error {
public:
    using Error::Error;
};

class SplitError : public DataError {
public:
    using DataError::DataError;
};

// Checkpoint loading failures.
class LoadError : public Error {
public:
    using Error::Error;
};

class VersionError : public LoadError {
public:
    using LoadError::LoadError;
};

class ParseError : public LoadError {
public:
    using LoadError::LoadError;
};

class DimensionError : public LoadError {
public:
    using LoadError::LoadError;
};

// A checkpoint does not fit the environment it is asked to drive.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

// Report columns that should cover the same series do not line up.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dqnlab
