#pragma once

// JSON <-> scalar conversions shared by the spec and trace readers.

#include <cmath>
#include <string>
#include <utility>

#include "json.hpp"

#include "deltaflow/error.hpp"
#include "deltaflow/scalar.hpp"

namespace deltaflow::detail {

using json = nlohmann::json;

// Rationals are written {"rat": [num, den]} so they read back exactly.
inline Scalar scalar_from_json(const json& j, const std::string& where) {
  switch (j.type()) {
    case json::value_t::number_integer:
      return j.get<std::int64_t>();
    case json::value_t::number_unsigned: {
      const auto u = j.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) throw ValidationError(where + ": integer out of range");
      return static_cast<std::int64_t>(u);
    }
    case json::value_t::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) throw ValidationError(where + ": non-finite number");
      return make_real(d);
    }
    case json::value_t::string:
      return j.get<std::string>();
    case json::value_t::null:
      throw ValidationError(where + ": NULL values are not supported");
    case json::value_t::object:
      if (j.size() == 1 && j.contains("rat") && j["rat"].is_array() && j["rat"].size() == 2 &&
          j["rat"][0].is_number_integer() && j["rat"][1].is_number_integer()) {
        return make_rational(j["rat"][0].get<std::int64_t>(), j["rat"][1].get<std::int64_t>());
      }
      [[fallthrough]];
    default:
      throw ValidationError(where + ": expected a number or string, got " + j.dump());
  }
}

inline json scalar_to_json(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Rational>) {
          return json{{"rat", {v.num, v.den}}};
        } else {
          return v;
        }
      },
      s);
}

// line:column of a byte offset.
inline std::pair<std::size_t, std::size_t> position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace deltaflow::detail
