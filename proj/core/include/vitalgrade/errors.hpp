#pragma once

#include <stdexcept>
#include <string>

namespace vitalgrade {

// Error taxonomy mirrors the CLI exit codes: config errors exit 2, data
// errors exit 3, training errors exit 4.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vitalgrade
