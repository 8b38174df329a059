#pragma once

#include <stdexcept>
#include <string>

namespace redd {

// Invalid or inconsistent configuration input (file, section, key, value).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The request is well-formed but outside what this build can compute
// (non-enumerable law asked for exact expectations, grid over budget, ...).
// The message states the required budget where applicable.
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace redd
