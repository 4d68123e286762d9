#pragma once

#include <string>

#include "doctest.h"
#include "pimsim/error.hpp"

// Runs fn and returns the code of the pimsim::Error it throws.
template <typename Fn>
pimsim::Errc code_of(Fn&& fn) {
    try {
        fn();
    } catch (const pimsim::Error& e) {
        return e.code();
    }
    FAIL("expected pimsim::Error");
    return pimsim::Errc::Io;
}

inline std::string data_path(const std::string& name) { return std::string(PIMSIM_TEST_DATA) + "/" + name; }
