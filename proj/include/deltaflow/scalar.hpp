#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace deltaflow {

// Exact fraction num/den with den > 1 and gcd(num, den) == 1. Whole values
// are never represented as Rational; see make_rational().
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

// One column value. Floats are never NaN (rejected by make_real), so the
// variant order is a strict total order.
using Scalar = std::variant<std::int64_t, double, std::string, Rational>;

enum class ScalarKind { Int, Real, String, Rational, Any };

Scalar make_real(double v);
// Normalises sign and gcd; returns an Int when the denominator divides.
Scalar make_rational(std::int64_t num, std::int64_t den);

ScalarKind kind_of(const Scalar& s);
const char* kind_name(ScalarKind k);
bool is_numeric(const Scalar& s);
// Numeric value as double (ints, reals and rationals).
double to_double(const Scalar& s);

std::string to_string(const Scalar& s);

using Tuple = std::vector<Scalar>;

std::string to_string(const Tuple& t);
std::ostream& operator<<(std::ostream& os, const Tuple& t);

// Builds a tuple from a brace list of mixed literals: tup(1, "a", 2.5).
template <typename... Ts>
Tuple tup(Ts&&... vs) {
  Tuple t;
  t.reserve(sizeof...(Ts));
  auto push = [&t](auto&& v) {
    using V = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<V, Scalar>) {
      t.push_back(v);
    } else if constexpr (std::is_integral_v<V>) {
      t.emplace_back(static_cast<std::int64_t>(v));
    } else if constexpr (std::is_floating_point_v<V>) {
      t.push_back(make_real(static_cast<double>(v)));
    } else {
      t.emplace_back(std::string(v));
    }
  };
  (push(std::forward<Ts>(vs)), ...);
  return t;
}

std::size_t hash_scalar(const Scalar& s) noexcept;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept;
};

Tuple concat(const Tuple& a, const Tuple& b);

}  // namespace deltaflow
