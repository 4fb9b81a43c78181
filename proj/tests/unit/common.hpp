#pragma once

#include <cmath>

#include "hbmgreen/types.hpp"

namespace testutil {

inline double rel(double a, double b) { return std::abs(a / b - 1.0); }

/// Code of the hbmgreen::Error thrown by f. *thrown tells whether anything was thrown.
template <class F>
hbmgreen::ErrorCode code_of(F&& f, bool* thrown = nullptr) {
  try {
    f();
  } catch (const hbmgreen::Error& e) {
    if (thrown) *thrown = true;
    return e.code();
  }
  if (thrown) *thrown = false;
  return hbmgreen::ErrorCode::InvalidArgument;
}

}  // namespace testutil
