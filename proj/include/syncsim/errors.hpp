#pragma once

#include <stdexcept>
#include <string>

namespace syncsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: config files, task graphs, CSV traces.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A value is well-formed but violates a domain invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& reason)
        : Error("invalid value for '" + field + "': " + reason), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Anything that goes wrong while the event loop is running.
class SimulationError : public Error {
public:
    using Error::Error;
};

class TimeTravel : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class TopologyViolation : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class LivelockGuard : public SimulationError {
public:
    using SimulationError::SimulationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace syncsim
