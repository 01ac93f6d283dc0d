#pragma once

#include <stdexcept>
#include <string>

namespace srmra {

/// Invalid dimensions, parameters or configuration. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that cannot proceed on the given data (singular system,
/// zero-norm reference, noisy batch on a noiseless path). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ConfigError(message);
    }
}

}  // namespace srmra
