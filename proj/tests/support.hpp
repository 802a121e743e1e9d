#pragma once

#include "lagdisc/error.hpp"

#include <optional>

namespace testing {

/// Kind of the lagdisc::Error raised by f, or nullopt when it returns normally.
template <class F>
std::optional<lagdisc::ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const lagdisc::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

}  // namespace testing
