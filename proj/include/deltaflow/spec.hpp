#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltaflow/circuit.hpp"
#include "deltaflow/recursion.hpp"
#include "deltaflow/relational.hpp"

namespace deltaflow {

// A query loaded from a JSON spec document:
//
//   {"relations": {"t": ["a", {"name": "x", "type": "int"}], ...},
//    "views": {"v": {"op": "distinct", "args": [...]}, ...},
//    "recursive": [{"rules": ["R(x, y) :- E(x, y).", ...]}],
//    "outputs": ["v"]}
//
// View operators: union, union_all, difference, intersect, project, filter,
// map, product, join, antijoin, distinct, aggregate, window. An argument is
// a relation/view name or a nested view. Expressions are {"col": name or
// index}, {"lit": value} or {"op": symbol, "args": [...]}.
struct QuerySpec {
  std::map<std::string, Schema> relations;
  // Output name -> arity.
  std::map<std::string, std::size_t> outputs;
  // True when some view is a window: transactions then carry a "time".
  bool uses_time = false;
  // Stream circuit over snapshots: one source per relation (plus the clock
  // source "time"), one sink per output. Recursion is evaluated naively.
  Circuit query{CircuitKind::Stream};
};

inline constexpr const char* kTimeSource = "time";

// Throws ValidationError; JSON syntax errors carry origin:line:column.
QuerySpec parse_spec(const std::string& text, const std::string& origin = "spec",
                     std::size_t cap = kRecursionCap);
QuerySpec load_spec(const std::string& path, std::size_t cap = kRecursionCap);

// The query on changes: per transaction, input changes in, output changes
// out.
Circuit incremental_circuit(const QuerySpec& spec);

}  // namespace deltaflow
