#ifndef VESAR_ERROR_HPP
#define VESAR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vesar {

// Raised for parameter values outside their documented domain.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when an estimate cannot be formed from the data at hand
// (empty arm, zero reference SAR).
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised while reading or validating a scenario file.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vesar

#endif
