#pragma once

#include <catch_amalgamated.hpp>

#include "common/error.hpp"

// Asserts that `expr` throws gccnmf::Error carrying `expected_code`.
#define REQUIRE_ERROR_CODE(expr, expected_code)                        \
  do {                                                                 \
    bool thrown_ = false;                                              \
    try {                                                              \
      (void)(expr);                                                    \
    } catch (const gccnmf::Error& e_) {                                \
      thrown_ = true;                                                  \
      INFO("message: " << e_.what());                                  \
      REQUIRE(static_cast<int>(e_.code()) == static_cast<int>(expected_code)); \
    }                                                                  \
    REQUIRE(thrown_);                                                  \
  } while (0)
