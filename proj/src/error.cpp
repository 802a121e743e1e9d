#include "lagdisc/error.hpp"

#include <fmt/format.h>

namespace lagdisc {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::Config: return "config";
        case ErrorKind::Lookup: return "lookup";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Stability: return "stability";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Unsupported: return "unsupported-form";
        case ErrorKind::DiscoveryFailure: return "discovery-failure";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

DivergenceError::DivergenceError(std::size_t step, std::size_t realization, double magnitude)
    : Error(ErrorKind::Divergence,
            fmt::format("trajectory diverged at step {} of realization {} (|state| = {:.3g})",
                        step, realization, magnitude)),
      step_(step),
      realization_(realization) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lagdisc
