#include "deltaflow/scalar.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "deltaflow/error.hpp"
#include "deltaflow/weight.hpp"

namespace deltaflow {

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  // Denominators are positive, so cross-multiplication preserves order.
  __int128 lhs = static_cast<__int128>(a.num) * b.den;
  __int128 rhs = static_cast<__int128>(b.num) * a.den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Scalar make_real(double v) {
  if (std::isnan(v)) throw ValidationError("NaN is not a valid scalar value");
  return Scalar{v};
}

Scalar make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  if (den < 0) {
    num = checked_neg(num);
    den = checked_neg(den);
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (den == 1) return Scalar{num};
  return Scalar{Rational{num, den}};
}

ScalarKind kind_of(const Scalar& s) {
  switch (s.index()) {
    case 0: return ScalarKind::Int;
    case 1: return ScalarKind::Real;
    case 2: return ScalarKind::String;
    default: return ScalarKind::Rational;
  }
}

const char* kind_name(ScalarKind k) {
  switch (k) {
    case ScalarKind::Int: return "int";
    case ScalarKind::Real: return "real";
    case ScalarKind::String: return "string";
    case ScalarKind::Rational: return "rational";
    case ScalarKind::Any: return "any";
  }
  return "?";
}

bool is_numeric(const Scalar& s) { return !std::holds_alternative<std::string>(s); }

double to_double(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::int64_t>) {
          return static_cast<double>(v);
        } else if constexpr (std::is_same_v<V, double>) {
          return v;
        } else if constexpr (std::is_same_v<V, Rational>) {
          return static_cast<double>(v.num) / static_cast<double>(v.den);
        } else {
          throw TypeMismatch("string used where a number is required");
        }
      },
      s);
}

std::string to_string(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<V, double>) {
          std::ostringstream os;
          os.precision(17);
          os << v;
          return os.str();
        } else if constexpr (std::is_same_v<V, Rational>) {
          return std::to_string(v.num) + "/" + std::to_string(v.den);
        } else {
          return "\"" + v + "\"";
        }
      },
      s);
}

std::string to_string(const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += to_string(t[i]);
  }
  return out + ")";
}

std::ostream& operator<<(std::ostream& os, const Tuple& t) { return os << to_string(t); }

std::size_t hash_scalar(const Scalar& s) noexcept {
  std::size_t h = std::visit(
      [](const auto& v) -> std::size_t {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Rational>) {
          return std::hash<std::int64_t>{}(v.num) * 31 + std::hash<std::int64_t>{}(v.den);
        } else if constexpr (std::is_same_v<V, double>) {
          // +0.0 and -0.0 compare equal and must hash equal.
          return v == 0.0 ? 0 : std::hash<double>{}(v);
        } else {
          return std::hash<V>{}(v);
        }
      },
      s);
  return h ^ (s.index() * 0x9e3779b97f4a7c15ULL);
}

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : t) {
    h ^= hash_scalar(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

Tuple concat(const Tuple& a, const Tuple& b) {
  Tuple out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace deltaflow
