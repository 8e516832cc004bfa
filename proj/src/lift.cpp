#include "deltaflow/circuit.hpp"
#include "deltaflow/error.hpp"
#include "circuit_internal.hpp"

namespace deltaflow {

std::map<std::string, NodeId> inline_circuit(Circuit& dst, const Circuit& sub, int scope,
                                             const std::map<std::string, NodeId>& bindings) {
  const int offset = dst.scope(scope).depth;
  std::vector<int> scope_map(sub.scope_count(), -1);
  scope_map[0] = scope;
  for (int s = 1; s < static_cast<int>(sub.scope_count()); ++s) {
    const Scope& x = sub.scope(s);
    if (scope_map[x.parent] < 0) throw CircuitError("scope listed before its parent");
    scope_map[s] = dst.add_scope(scope_map[x.parent], x.kind);
    if (sub.termination(s)) dst.set_termination(scope_map[s], sub.termination(s));
    if (sub.scope_cap(s) != sub.iteration_cap()) dst.set_scope_cap(scope_map[s], sub.scope_cap(s));
  }
  const auto& nodes = sub.nodes();
  std::vector<NodeId> map(nodes.size(), -1);
  std::vector<NodeId> created;
  for (NodeId id = 0; id < static_cast<NodeId>(nodes.size()); ++id) {
    const Node& n = nodes[id];
    if (n.kind == NodeKind::Source) {
      auto it = bindings.find(n.label);
      if (it == bindings.end()) throw CircuitError("no binding for source '" + n.label + "'");
      if (detail::visible_scope(dst, it->second) != scope) {
        throw CircuitError("binding for '" + n.label + "' is outside the target scope");
      }
      map[id] = it->second;
    } else if (n.kind == NodeKind::Subcircuit) {
      map[id] = dst.scope(scope_map[n.child_scope]).super;
    } else {
      Node copy = n;
      copy.scope = scope_map[n.scope];
      if (is_time_op(n.kind) || is_entry(n.kind) || is_exit(n.kind)) copy.dim = n.dim + offset;
      map[id] = dst.add_node(std::move(copy));
      created.push_back(id);
    }
  }
  for (NodeId id : created) {
    Node& n = dst.mutable_node(map[id]);
    for (NodeId& i : n.inputs) i = map[i];
    if (n.feedback_from >= 0) n.feedback_from = map[n.feedback_from];
  }
  std::map<std::string, NodeId> out;
  for (const auto& [name, id] : sub.sinks()) out[name] = map[id];
  return out;
}

Circuit lift_circuit(const Circuit& c) {
  if (c.kind() == CircuitKind::Scalar) {
    Circuit out = c;
    out.set_kind(CircuitKind::Stream);
    return out;
  }
  Circuit out(CircuitKind::Stream);
  out.set_iteration_cap(c.iteration_cap());
  const int row = out.add_scope(0, ScopeKind::Row);
  std::map<std::string, NodeId> bindings;
  for (const auto& [name, id] : c.sources()) {
    const Node& n = c.node(id);
    const NodeId src = out.add_source(name, ValueKind::Stream, n.clock);
    bindings[name] = out.add_row_unpack(row, src);
  }
  for (const auto& [name, id] : inline_circuit(out, c, row, bindings)) {
    out.add_sink(out.add_row_pack(id), name);
  }
  return out;
}

}  // namespace deltaflow
