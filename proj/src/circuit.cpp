#include "deltaflow/circuit.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "deltaflow/error.hpp"
#include "circuit_internal.hpp"

namespace deltaflow {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Source: return "source";
    case NodeKind::Lifted: return "lifted";
    case NodeKind::Delay: return "delay";
    case NodeKind::Integrate: return "integrate";
    case NodeKind::Differentiate: return "differentiate";
    case NodeKind::Delta0: return "delta0";
    case NodeKind::StreamSum: return "stream-sum";
    case NodeKind::RowUnpack: return "row-unpack";
    case NodeKind::RowPack: return "row-pack";
    case NodeKind::Plus: return "plus";
    case NodeKind::Negate: return "negate";
    case NodeKind::Subcircuit: return "subcircuit";
    case NodeKind::FeedbackStub: return "feedback-stub";
  }
  return "?";
}

void Circuit::set_kind(CircuitKind k) {
  kind_ = k;
  invalidate();
}

void Circuit::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw CircuitError("no node with id " + std::to_string(id));
  }
}

const Node& Circuit::node(NodeId id) const {
  check_id(id);
  return nodes_[id];
}

Node& Circuit::mutable_node(NodeId id) {
  check_id(id);
  invalidate();
  return nodes_[id];
}

const Scope& Circuit::scope(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= scopes_.size()) {
    throw CircuitError("no scope with id " + std::to_string(id));
  }
  return scopes_[id];
}

int detail::visible_scope(const Circuit& c, NodeId id) {
  const Node& n = c.node(id);
  if (is_exit(n.kind)) return c.scope(n.scope).parent;
  return n.scope;
}

int Circuit::scope_of_inputs(const std::vector<NodeId>& inputs, int fallback) const {
  if (inputs.empty()) {
    scope(fallback);
    return fallback;
  }
  int s = -2;
  for (NodeId i : inputs) {
    check_id(i);
    const int v = detail::visible_scope(*this, i);
    if (s == -2) {
      s = v;
    } else if (s != v) {
      throw CircuitError("inputs of one node live in different clock domains");
    }
  }
  return s;
}

int Circuit::clock_dim(int s, int dim) const { return dim < 0 ? scope(s).depth : dim; }

NodeId Circuit::add_node(Node n) {
  invalidate();
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Circuit::add_source(const std::string& name, ValueKind kind, bool clock) {
  if (sources_.count(name)) throw CircuitError("duplicate source name '" + name + "'");
  Node n;
  n.kind = NodeKind::Source;
  n.source_kind = kind;
  n.clock = clock;
  n.label = name;
  const NodeId id = add_node(std::move(n));
  sources_[name] = id;
  return id;
}

void Circuit::add_sink(NodeId node, const std::string& name) {
  check_id(node);
  if (sinks_.count(name)) throw CircuitError("duplicate sink name '" + name + "'");
  if (detail::visible_scope(*this, node) != 0) throw CircuitError("sink must be a root-level node");
  invalidate();
  sinks_[name] = node;
}

void Circuit::set_sink(const std::string& name, NodeId node) {
  check_id(node);
  invalidate();
  sinks_[name] = node;
}

NodeId Circuit::add_lifted(OpPtr op, std::vector<NodeId> inputs, int scope) {
  if (!op) throw CircuitError("null operator");
  if (inputs.size() != op->arity()) {
    throw CircuitError("operator " + op->name() + " expects " + std::to_string(op->arity()) + " inputs, got " +
                       std::to_string(inputs.size()));
  }
  Node n;
  n.kind = NodeKind::Lifted;
  n.scope = scope_of_inputs(inputs, scope);
  n.op = std::move(op);
  n.inputs = std::move(inputs);
  return add_node(std::move(n));
}

NodeId Circuit::add_plus(NodeId a, NodeId b) {
  Node n;
  n.kind = NodeKind::Plus;
  n.inputs = {a, b};
  n.scope = scope_of_inputs(n.inputs, 0);
  return add_node(std::move(n));
}

NodeId Circuit::add_negate(NodeId a) {
  Node n;
  n.kind = NodeKind::Negate;
  n.inputs = {a};
  n.scope = scope_of_inputs(n.inputs, 0);
  return add_node(std::move(n));
}

NodeId Circuit::add_minus(NodeId a, NodeId b) { return add_plus(a, add_negate(b)); }

namespace {

Node time_node(NodeKind kind, NodeId in, int scope, int dim) {
  Node n;
  n.kind = kind;
  n.inputs = {in};
  n.scope = scope;
  n.dim = dim;
  return n;
}

}  // namespace

NodeId Circuit::add_delay(NodeId in, int dim) {
  const int s = scope_of_inputs({in}, 0);
  return add_node(time_node(NodeKind::Delay, in, s, clock_dim(s, dim)));
}

NodeId Circuit::add_integrate(NodeId in, int dim) {
  const int s = scope_of_inputs({in}, 0);
  return add_node(time_node(NodeKind::Integrate, in, s, clock_dim(s, dim)));
}

NodeId Circuit::add_differentiate(NodeId in, int dim) {
  const int s = scope_of_inputs({in}, 0);
  return add_node(time_node(NodeKind::Differentiate, in, s, clock_dim(s, dim)));
}

int Circuit::add_scope(int parent, ScopeKind kind) {
  const Scope& p = scope(parent);
  if (kind == ScopeKind::Root) throw CircuitError("only one root scope");
  Scope s;
  s.kind = kind;
  s.parent = parent;
  s.depth = p.depth + 1;
  const int id = static_cast<int>(scopes_.size());
  scopes_.push_back(s);
  Node n;
  n.kind = NodeKind::Subcircuit;
  n.scope = parent;
  n.child_scope = id;
  scopes_[id].super = add_node(std::move(n));
  return id;
}

NodeId Circuit::add_delta0(int s, NodeId outer) {
  const Scope& sc = scope(s);
  if (sc.kind != ScopeKind::Fixpoint) throw CircuitError("delta0 must enter a fixpoint scope");
  if (scope_of_inputs({outer}, 0) != sc.parent) throw CircuitError("delta0 input must live in the enclosing scope");
  return add_node(time_node(NodeKind::Delta0, outer, s, sc.depth));
}

NodeId Circuit::add_stream_sum(NodeId inner) {
  const int s = scope_of_inputs({inner}, 0);
  if (scope(s).kind != ScopeKind::Fixpoint) throw CircuitError("stream-sum must leave a fixpoint scope");
  return add_node(time_node(NodeKind::StreamSum, inner, s, scope(s).depth));
}

NodeId Circuit::add_row_unpack(int s, NodeId outer) {
  const Scope& sc = scope(s);
  if (sc.kind != ScopeKind::Row) throw CircuitError("row-unpack must enter a row scope");
  if (scope_of_inputs({outer}, 0) != sc.parent) throw CircuitError("row-unpack input must live in the enclosing scope");
  return add_node(time_node(NodeKind::RowUnpack, outer, s, sc.depth));
}

NodeId Circuit::add_row_pack(NodeId inner) {
  const int s = scope_of_inputs({inner}, 0);
  if (scope(s).kind != ScopeKind::Row) throw CircuitError("row-pack must leave a row scope");
  return add_node(time_node(NodeKind::RowPack, inner, s, scope(s).depth));
}

NodeId Circuit::add_feedback_stub(int s) {
  scope(s);
  Node n;
  n.kind = NodeKind::FeedbackStub;
  n.scope = s;
  return add_node(std::move(n));
}

void Circuit::connect_feedback(NodeId from, NodeId stub) {
  check_id(from);
  check_id(stub);
  Node& st = nodes_[stub];
  if (st.kind != NodeKind::FeedbackStub) throw CircuitError("feedback target is not a feedback stub");
  if (st.feedback_from >= 0) throw CircuitError("feedback stub already connected");
  if (detail::visible_scope(*this, from) != st.scope) {
    throw CircuitError("feedback edge crosses clock domains");
  }
  invalidate();
  st.feedback_from = from;
  std::vector<NodeId> order;
  if (!detail::scope_order(*this, st.scope, order)) {
    st.feedback_from = -1;
    throw CircuitError("feedback cycle without a delay");
  }
}

void Circuit::set_termination(int s, Termination until) {
  if (scope(s).kind != ScopeKind::Fixpoint) throw CircuitError("termination applies to fixpoint scopes");
  invalidate();
  until_[s] = std::move(until);
}

void Circuit::set_iteration_cap(std::size_t cap) {
  if (cap == 0) throw ValidationError("iteration cap must be positive");
  cap_ = cap;
}

void Circuit::set_scope_cap(int s, std::size_t cap) {
  scope(s);
  if (cap == 0) throw ValidationError("iteration cap must be positive");
  caps_[s] = cap;
}

const Termination& Circuit::termination(int s) const {
  static const Termination kNone;
  auto it = until_.find(s);
  return it == until_.end() ? kNone : it->second;
}

std::size_t Circuit::scope_cap(int s) const {
  auto it = caps_.find(s);
  return it == caps_.end() ? cap_ : it->second;
}

std::vector<NodeId> Circuit::consumers(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < static_cast<NodeId>(nodes_.size()); ++n) {
    const Node& x = nodes_[n];
    if (std::find(x.inputs.begin(), x.inputs.end(), id) != x.inputs.end() || x.feedback_from == id) {
      out.push_back(n);
    }
  }
  return out;
}

std::vector<NodeId> Circuit::entries(int s) const {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < static_cast<NodeId>(nodes_.size()); ++n) {
    if (nodes_[n].scope == s && is_entry(nodes_[n].kind)) out.push_back(n);
  }
  return out;
}

std::vector<NodeId> Circuit::exits(int s) const {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < static_cast<NodeId>(nodes_.size()); ++n) {
    if (nodes_[n].scope == s && is_exit(nodes_[n].kind)) out.push_back(n);
  }
  return out;
}

bool detail::scope_order(const Circuit& c, int s, std::vector<NodeId>& order) {
  const auto& nodes = c.nodes();
  // Representative of node i inside scope s, or -1 if i is outside it.
  auto rep = [&](NodeId i) -> NodeId {
    int sc = nodes[i].scope;
    NodeId r = i;
    while (sc != s) {
      const Scope& x = c.scope(sc);
      if (x.parent < 0) return -1;
      r = x.super;
      sc = x.parent;
    }
    return r;
  };
  std::vector<NodeId> members;
  for (NodeId n = 0; n < static_cast<NodeId>(nodes.size()); ++n) {
    if (nodes[n].scope == s) members.push_back(n);
  }
  std::map<NodeId, std::vector<NodeId>> deps;
  auto add_dep = [&](NodeId n, NodeId i) {
    const NodeId r = rep(i);
    if (r >= 0 && r != n) deps[n].push_back(r);
    if (r == n) deps[n].push_back(n);
  };
  for (NodeId n : members) {
    const Node& x = nodes[n];
    deps[n];
    switch (x.kind) {
      case NodeKind::Source:
      case NodeKind::Delay:
      case NodeKind::Delta0:
      case NodeKind::RowUnpack:
        break;
      case NodeKind::FeedbackStub:
        if (x.feedback_from >= 0) add_dep(n, x.feedback_from);
        break;
      case NodeKind::Subcircuit:
        for (NodeId e : c.entries(x.child_scope)) add_dep(n, nodes[e].inputs[0]);
        break;
      default:
        for (NodeId i : x.inputs) add_dep(n, i);
    }
  }
  std::map<NodeId, int> indeg;
  std::map<NodeId, std::vector<NodeId>> users;
  for (auto& [n, ds] : deps) {
    indeg[n] += 0;
    for (NodeId d : ds) {
      indeg[n]++;
      users[d].push_back(n);
    }
  }
  std::deque<NodeId> ready;
  for (NodeId n : members) {
    if (indeg[n] == 0) ready.push_back(n);
  }
  order.clear();
  while (!ready.empty()) {
    const NodeId n = ready.front();
    ready.pop_front();
    order.push_back(n);
    for (NodeId u : users[n]) {
      if (--indeg[u] == 0) ready.push_back(u);
    }
  }
  return order.size() == members.size();
}

void Circuit::validate() const {
  auto fail = [](NodeId id, const std::string& what) {
    throw CircuitError("node " + std::to_string(id) + ": " + what);
  };
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    const Node& n = nodes_[id];
    scope(n.scope);
    for (NodeId i : n.inputs) check_id(i);
    const Scope& sc = scopes_[n.scope];
    std::size_t want = 1;
    switch (n.kind) {
      case NodeKind::Source:
      case NodeKind::Subcircuit:
      case NodeKind::FeedbackStub: want = 0; break;
      case NodeKind::Plus: want = 2; break;
      case NodeKind::Lifted: want = n.op ? n.op->arity() : 0; break;
      default: break;
    }
    if (n.inputs.size() != want) fail(id, "wrong number of inputs");
    if (n.kind == NodeKind::Lifted && !n.op) fail(id, "lifted node without operator");
    if (n.kind == NodeKind::Source && n.scope != 0) fail(id, "sources must be at the root");
    if (is_entry(n.kind)) {
      const ScopeKind want_kind = n.kind == NodeKind::Delta0 ? ScopeKind::Fixpoint : ScopeKind::Row;
      if (sc.kind != want_kind) fail(id, "boundary node in the wrong kind of scope");
      if (detail::visible_scope(*this, n.inputs[0]) != sc.parent) fail(id, "entry input outside the enclosing scope");
    } else if (is_exit(n.kind)) {
      const ScopeKind want_kind = n.kind == NodeKind::StreamSum ? ScopeKind::Fixpoint : ScopeKind::Row;
      if (sc.kind != want_kind) fail(id, "boundary node in the wrong kind of scope");
      if (detail::visible_scope(*this, n.inputs[0]) != n.scope) fail(id, "exit input outside its scope");
    } else {
      for (NodeId i : n.inputs) {
        if (detail::visible_scope(*this, i) != n.scope) fail(id, "edge crosses clock domains without a boundary");
      }
    }
    if (n.kind == NodeKind::Subcircuit) {
      if (n.child_scope <= 0 || scope(n.child_scope).super != id) fail(id, "dangling subcircuit");
    }
    if (n.kind == NodeKind::FeedbackStub) {
      if (n.feedback_from < 0) fail(id, "feedback stub never connected");
      check_id(n.feedback_from);
      if (detail::visible_scope(*this, n.feedback_from) != n.scope) fail(id, "feedback edge crosses clock domains");
    }
    if (is_time_op(n.kind)) {
      const int d = sc.depth;
      if (n.dim != d && n.dim != d - 1) {
        fail(id, "clock " + std::to_string(n.dim) + " is not available in a scope of depth " + std::to_string(d));
      }
      if (n.dim == 0 && kind_ == CircuitKind::Scalar) fail(id, "time operator on the clock of a scalar circuit");
    }
  }
  for (const auto& [name, id] : sinks_) {
    check_id(id);
    if (detail::visible_scope(*this, id) != 0) throw CircuitError("sink '" + name + "' is not a root-level node");
  }
  for (int s = 0; s < static_cast<int>(scopes_.size()); ++s) {
    std::vector<NodeId> order;
    if (!detail::scope_order(*this, s, order)) throw CircuitError("cycle without a delay in scope " + std::to_string(s));
  }
}

std::vector<NodeId> Circuit::compact() {
  const std::size_t n = nodes_.size();
  std::vector<char> live(n, 0);
  std::vector<char> scope_live(scopes_.size(), 0);
  scope_live[0] = 1;
  std::vector<NodeId> work;
  auto mark = [&](NodeId id) {
    if (!live[id]) {
      live[id] = 1;
      work.push_back(id);
    }
  };
  for (const auto& [name, id] : sources_) mark(id);
  for (const auto& [name, id] : sinks_) mark(id);
  while (!work.empty()) {
    const NodeId id = work.back();
    work.pop_back();
    const Node& x = nodes_[id];
    for (NodeId i : x.inputs) mark(i);
    if (x.feedback_from >= 0) mark(x.feedback_from);
    for (int s = x.scope; s > 0 && !scope_live[s]; s = scopes_[s].parent) {
      scope_live[s] = 1;
      mark(scopes_[s].super);
    }
  }
  std::vector<int> scope_map(scopes_.size(), -1);
  std::vector<Scope> new_scopes;
  for (std::size_t s = 0; s < scopes_.size(); ++s) {
    if (!scope_live[s]) continue;
    scope_map[s] = static_cast<int>(new_scopes.size());
    new_scopes.push_back(scopes_[s]);
  }
  std::vector<NodeId> map(n, -1);
  std::vector<Node> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    map[i] = static_cast<NodeId>(kept.size());
    kept.push_back(nodes_[i]);
  }
  for (Node& x : kept) {
    for (NodeId& i : x.inputs) i = map[i];
    if (x.feedback_from >= 0) x.feedback_from = map[x.feedback_from];
    x.scope = scope_map[x.scope];
    if (x.child_scope >= 0) x.child_scope = scope_map[x.child_scope];
  }
  for (Scope& s : new_scopes) {
    if (s.parent >= 0) s.parent = scope_map[s.parent];
    if (s.super >= 0) s.super = map[s.super];
  }
  std::map<int, Termination> until;
  for (auto& [s, t] : until_) {
    if (scope_map[s] >= 0) until[scope_map[s]] = std::move(t);
  }
  std::map<int, std::size_t> caps;
  for (auto& [s, c] : caps_) {
    if (scope_map[s] >= 0) caps[scope_map[s]] = c;
  }
  std::map<NodeId, Probe> probes;
  for (auto& [id, p] : probes_) {
    if (map[id] >= 0) probes[map[id]] = std::move(p);
  }
  for (auto& [name, id] : sources_) id = map[id];
  for (auto& [name, id] : sinks_) id = map[id];
  nodes_ = std::move(kept);
  scopes_ = std::move(new_scopes);
  until_ = std::move(until);
  caps_ = std::move(caps);
  probes_ = std::move(probes);
  invalidate();
  return map;
}

void Circuit::set_probe(NodeId id, Probe p) {
  check_id(id);
  invalidate();
  probes_[id] = std::move(p);
}

void Circuit::clear_probes() {
  invalidate();
  probes_.clear();
}

std::string Circuit::to_string() const {
  std::ostringstream os;
  os << (kind_ == CircuitKind::Scalar ? "scalar" : "stream") << " circuit, " << nodes_.size() << " nodes\n";
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    const Node& n = nodes_[id];
    os << "  " << id << ": " << node_kind_name(n.kind);
    if (n.op) os << " [" << n.op->describe() << "]";
    if (!n.label.empty()) os << " '" << n.label << "'";
    if (is_time_op(n.kind)) os << " dim=" << n.dim;
    if (n.bracket) os << " bracket";
    if (n.clock) os << " clock";
    if (n.child_scope >= 0) os << " scope#" << n.child_scope;
    os << " @" << n.scope << " <-";
    for (NodeId i : n.inputs) os << " " << i;
    if (n.feedback_from >= 0) os << " fb " << n.feedback_from;
    os << "\n";
  }
  for (const auto& [name, id] : sinks_) os << "  sink " << name << " = " << id << "\n";
  return os.str();
}

std::map<std::string, int> census(const Circuit& c) {
  std::map<std::string, int> out;
  for (const Node& n : c.nodes()) {
    if (n.kind == NodeKind::Lifted) {
      out[n.op->name()]++;
    } else {
      out[node_kind_name(n.kind)]++;
    }
  }
  return out;
}

}  // namespace deltaflow
