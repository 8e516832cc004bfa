#pragma once

#include <cstdint>
#include <string>

#include "deltaflow/error.hpp"

namespace deltaflow {

using Weight = std::int64_t;

inline Weight checked_add(Weight a, Weight b) {
  Weight r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw OverflowError("weight overflow: " + std::to_string(a) + " + " + std::to_string(b));
  }
  return r;
}

inline Weight checked_mul(Weight a, Weight b) {
  Weight r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw OverflowError("weight overflow: " + std::to_string(a) + " * " + std::to_string(b));
  }
  return r;
}

inline Weight checked_neg(Weight a) {
  if (a == INT64_MIN) throw OverflowError("weight overflow: negating INT64_MIN");
  return -a;
}

}  // namespace deltaflow
