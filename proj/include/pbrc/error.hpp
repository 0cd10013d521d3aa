#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbrc {

enum class ErrorKind {
    Dimension,
    Convergence,
    DegenerateMatrix,
    Singular,
    EmptyInput,
    Schema,
    Integrity,
    Parse,
    UnknownLabel,
    DegenerateTask,
    Io,
    Config,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every library failure. The kind selects the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Power iteration ran out of iterations. Carries the last estimate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double best_estimate)
        : Error(ErrorKind::Convergence, message), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace pbrc
