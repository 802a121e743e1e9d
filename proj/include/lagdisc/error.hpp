#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagdisc {

enum class ErrorKind {
    InvalidArgument,
    Config,
    Lookup,
    Schema,
    Stability,
    Divergence,
    Numerical,
    Unsupported,
    DiscoveryFailure,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when a trajectory leaves the blow-up bound.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, std::size_t realization, double magnitude);
    std::size_t step() const noexcept { return step_; }
    std::size_t realization() const noexcept { return realization_; }

private:
    std::size_t step_;
    std::size_t realization_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace lagdisc
