#pragma once

#include <stdexcept>
#include <string>

namespace fopinn {

struct OnInterfaceError : std::runtime_error {
    explicit OnInterfaceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotSpdError : std::runtime_error {
    explicit NotSpdError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoConvergenceError : std::runtime_error {
    explicit NoConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatchError : std::runtime_error {
    explicit DimensionMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

struct WrongOutputCountError : std::runtime_error {
    explicit WrongOutputCountError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularSystemError : std::runtime_error {
    explicit SingularSystemError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fopinn
