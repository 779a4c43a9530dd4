#pragma once

#include <stdexcept>
#include <string>

namespace hilpareto {

/// A linear system or factorization could not be solved even after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (including LQR design failures).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state encountered while integrating the task dynamics.
class SimulationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Session log could not be parsed or has an unsupported format version.
class LogFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hilpareto
