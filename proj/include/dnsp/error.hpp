#pragma once

#include <stdexcept>
#include <string>

namespace dnsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of two operands do not agree, or a size precondition failed.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A parameter or setting is outside its valid domain.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input contains NaN/Inf or a computation produced one.
class NumericError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Malformed file contents (bad magic, version, truncated payload).
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, int epoch)
        : Error("training diverged in epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    [[nodiscard]] int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace dnsp
