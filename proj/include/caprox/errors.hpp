#pragma once

#include <stdexcept>
#include <string>

namespace caprox {

// Error taxonomy shared by the library and the CLI. Each class carries the
// process exit code the CLI maps it to (0 is success, 1 unexpected).
struct Error : std::runtime_error {
    int exit_code;
    Error(const std::string& msg, int code) : std::runtime_error(msg), exit_code(code) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg, 2) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg)
        : Error("precondition violation: " + msg, 3) {}
};

struct FitError : Error {
    double residual = 0.0;
    explicit FitError(const std::string& msg, double res = 0.0)
        : Error("fit error: " + msg, 4), residual(res) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg, 5) {}
};

}  // namespace caprox
