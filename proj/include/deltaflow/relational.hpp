#pragma once

#include <string>
#include <vector>

#include "deltaflow/circuit.hpp"
#include "deltaflow/expr.hpp"

namespace deltaflow {

struct Column {
  std::string name;
  ScalarKind kind = ScalarKind::Any;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> cols);
  // All columns of kind Any.
  static Schema of(const std::vector<std::string>& names);

  std::size_t arity() const { return cols_.size(); }
  const std::vector<Column>& columns() const { return cols_; }
  const Column& at(std::size_t i) const { return cols_.at(i); }
  // Throws ValidationError naming the column when absent.
  std::size_t index(const std::string& name) const;
  bool has(const std::string& name) const;
  Schema select(const std::vector<std::size_t>& cols) const;
  // Right-hand names that clash with a left-hand name get a "_r" suffix.
  Schema concat(const Schema& right) const;
  // Same arity and compatible kinds position by position.
  bool compatible(const Schema& other) const;
  // Rejects tuples of the wrong arity or kind.
  void check(const Tuple& t, const std::string& relation) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Column> cols_;
};

// A node producing Z-sets together with the schema of their tuples.
struct Rel {
  NodeId node = -1;
  Schema schema;
};

// Source node declared with a schema.
Rel add_relation(Circuit& c, const std::string& name, const Schema& schema);

// Set semantics append a distinct to the bag (Z-set) operator.
enum class Semantics { Bag, Set };

Rel build_union(Circuit& c, const Rel& a, const Rel& b);
Rel build_union_all(Circuit& c, const Rel& a, const Rel& b);
Rel build_projection(Circuit& c, const Rel& in, const std::vector<std::string>& cols,
                     Semantics sem = Semantics::Bag);
Rel build_map(Circuit& c, const Rel& in, const ExprList& outputs, const Schema& out,
              Semantics sem = Semantics::Bag);
Rel build_filter(Circuit& c, const Rel& in, const Expr& predicate, Semantics sem = Semantics::Bag);
Rel build_cartesian(Circuit& c, const Rel& a, const Rel& b);
Rel build_equijoin(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b);
Rel build_intersect(Circuit& c, const Rel& a, const Rel& b);
Rel build_difference(Circuit& c, const Rel& a, const Rel& b);
// Rows of a with no match in b: distinct(a - a ⋉ distinct(keys of b)).
Rel build_antijoin(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b);
Rel build_distinct(Circuit& c, const Rel& in);
// GROUP BY key columns with one aggregate over `column`; output columns
// are the keys followed by `out_name`.
Rel build_aggregate(Circuit& c, const Rel& in, const std::vector<std::string>& keys, AggKind agg,
                    const std::string& column, const std::string& out_name);

// Incremental primitives. `dim` is the clock whose changes the input
// carries (-1: the clock of the input's scope).
NodeId build_inc_distinct(Circuit& c, NodeId deltas, int dim = -1);
// Change of op(I a, I b) for a bilinear op, given the changes of a and b.
// Join operators keep their integrated sides indexed by key.
NodeId build_inc_bilinear(Circuit& c, const OpPtr& op, NodeId a, NodeId b, int dim = -1);
Rel build_inc_join(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b);

struct WindowSpec {
  std::size_t ts_column = 0;
  Scalar width = std::int64_t{1};
};

// Contents of the integrated input whose timestamp is at least
// theta - width, kept in a feedback loop that only retains in-window rows.
// `theta` is a clock source (one bound per step, non-decreasing).
Rel build_window(Circuit& c, const Rel& deltas, NodeId theta, const WindowSpec& spec);
// Join of the accumulated relation with the current events only.
Rel build_stream_join(Circuit& c, const Rel& relation_deltas, const Rel& events,
                      const std::vector<std::string>& key_rel, const std::vector<std::string>& key_events);

}  // namespace deltaflow
