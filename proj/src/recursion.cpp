#include "deltaflow/recursion.hpp"

#include "deltaflow/error.hpp"
#include "deltaflow/incremental.hpp"

namespace deltaflow {

NodeId add_fixpoint(Circuit& c, const RecursiveBlock& block, const std::map<std::string, NodeId>& inputs) {
  if (block.body.kind() != CircuitKind::Scalar) throw ValidationError("recursive body must be a scalar circuit");
  if (!block.body.sources().count(block.recursive)) {
    throw ValidationError("recursive body has no source named '" + block.recursive + "'");
  }
  if (!block.body.sinks().count(block.output)) {
    throw ValidationError("recursive body has no sink named '" + block.output + "'");
  }
  const int s = c.add_scope(0);
  c.set_scope_cap(s, block.cap);
  const int dim = c.scope(s).depth;

  std::map<std::string, NodeId> bindings;
  for (const auto& [name, id] : block.body.sources()) {
    if (name == block.recursive) continue;
    auto it = inputs.find(name);
    if (it == inputs.end()) throw ValidationError("no input bound to '" + name + "'");
    const NodeId entry = c.add_integrate(c.add_delta0(s, it->second), dim);
    c.mutable_node(entry).bracket = true;
    bindings[name] = entry;
  }
  const NodeId stub = c.add_feedback_stub(s);
  bindings[block.recursive] = c.add_delay(stub, dim);

  const NodeId round = inline_circuit(c, block.body, s, bindings).at(block.output);
  const NodeId facts = c.add_lifted(distinct_op(), {round});
  c.connect_feedback(facts, stub);
  const NodeId change = c.add_differentiate(facts, dim);
  c.mutable_node(change).bracket = true;
  return c.add_stream_sum(change);
}

namespace {

Circuit naive_circuit(const RecursiveBlock& block) {
  Circuit c(CircuitKind::Scalar);
  std::map<std::string, NodeId> inputs;
  for (const auto& [name, id] : block.body.sources()) {
    if (name != block.recursive) inputs[name] = c.add_source(name, block.body.node(id).source_kind);
  }
  c.add_sink(add_fixpoint(c, block, inputs), block.output);
  c.validate();
  return c;
}

}  // namespace

Circuit build_naive(const RecursiveBlock& block) { return naive_circuit(block); }

Circuit build_seminaive(const RecursiveBlock& block) { return optimize(naive_circuit(block)); }

Circuit build_incremental_recursive(const RecursiveBlock& block) {
  return optimize(incrementalize_naive(lift_circuit(naive_circuit(block))));
}

Circuit build_while(const Circuit& q, std::size_t cap) {
  if (q.kind() != CircuitKind::Scalar) throw ValidationError("while body must be a scalar circuit");
  if (q.sources().size() != 1) throw ValidationError("while body must have exactly one source");
  if (!q.sinks().count("out")) throw ValidationError("while body has no sink named 'out'");
  const auto& [name, src] = *q.sources().begin();

  Circuit c(CircuitKind::Scalar);
  const NodeId in = c.add_source(name, q.node(src).source_kind);
  const int s = c.add_scope(0);
  c.set_scope_cap(s, cap);
  const NodeId stub = c.add_feedback_stub(s);
  const NodeId x = c.add_plus(c.add_delta0(s, in), c.add_delay(stub));
  const NodeId y = inline_circuit(c, q, s, {{name, x}}).at("out");
  c.connect_feedback(y, stub);
  c.add_sink(c.add_stream_sum(c.add_differentiate(y)), "out");
  c.validate();
  return c;
}

}  // namespace deltaflow
