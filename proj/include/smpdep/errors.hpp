#pragma once

#include <stdexcept>
#include <string>

namespace smpdep {

// Invalid or inconsistent user input (config files, CLI arguments,
// parameter values). The message names the offending field by its
// dotted path, e.g. "parameters.sf.2.failure".
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg) {}
};

// Model structure violates an assumption of the requested operation,
// e.g. a reducible transition matrix passed to the stationary solver.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine could not reach its accuracy target.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace smpdep
