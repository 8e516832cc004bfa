#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltaflow/relational.hpp"
#include "deltaflow/zset.hpp"

namespace deltaflow {

// One line of a change trace:
//   {"tx": 3, "time": 120, "changes": [["E", [1, 2], 1], ["E", [2, 3], -1]]}
// "time" is optional and feeds window bounds.
struct Transaction {
  std::int64_t tx = 0;
  std::optional<Scalar> time;
  std::map<std::string, ZSet> changes;
};

using ChangeTrace = std::vector<Transaction>;

// Checks tuples against `schemas` when given; unknown relations, zero
// weights and nulls are rejected. Errors name origin:line.
ChangeTrace parse_trace(const std::string& text, const std::map<std::string, Schema>* schemas = nullptr,
                        const std::string& origin = "trace");
ChangeTrace load_trace(const std::string& path, const std::map<std::string, Schema>* schemas = nullptr);

// Canonical form: relations by name, tuples in Z-set order, no spaces.
std::string format_transaction(const Transaction& t);
std::string format_trace(const ChangeTrace& trace);

std::string read_file(const std::string& path);

}  // namespace deltaflow
