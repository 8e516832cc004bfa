#pragma once

#include <vector>

#include "deltaflow/circuit.hpp"

namespace deltaflow {

inline bool is_entry(NodeKind k) { return k == NodeKind::Delta0 || k == NodeKind::RowUnpack; }
inline bool is_exit(NodeKind k) { return k == NodeKind::StreamSum || k == NodeKind::RowPack; }
inline bool is_time_op(NodeKind k) {
  return k == NodeKind::Delay || k == NodeKind::Integrate || k == NodeKind::Differentiate;
}

namespace detail {

// Scope whose step computes node id's value as seen by its consumers: the
// enclosing scope for exits, the node's own scope otherwise.
int visible_scope(const Circuit& c, NodeId id);

// Evaluation order for the nodes of scope s (child scopes appear as their
// subcircuit node). Delay inputs are not ordering constraints. Returns
// false when the remaining dependencies contain a cycle.
bool scope_order(const Circuit& c, int s, std::vector<NodeId>& order);

}  // namespace detail
}  // namespace deltaflow
