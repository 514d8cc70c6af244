#pragma once

#include <doctest.h>

#include <functional>

#include "sdd/error.hpp"

namespace sdd::testing {

// Runs fn and returns the code of the sdd::error it throws.
inline errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    FAIL("expected an sdd::error");
    return errc::invalid_params;
}

}  // namespace sdd::testing
