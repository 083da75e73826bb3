#pragma once

#include <stdexcept>
#include <string>

namespace srl {

// Caller broke a documented precondition.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Bad run configuration (invalid dimensions, missing wiring, unknown keys).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// File could not be read/written or failed validation on load.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input; message names the offending line.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srl
