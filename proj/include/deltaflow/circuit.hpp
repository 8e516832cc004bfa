#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "deltaflow/operator.hpp"
#include "deltaflow/value.hpp"

namespace deltaflow {

using NodeId = int;

enum class NodeKind {
  Source,
  Lifted,
  Delay,
  Integrate,
  Differentiate,
  Delta0,
  StreamSum,
  RowUnpack,
  RowPack,
  Plus,
  Negate,
  Subcircuit,
  FeedbackStub,
};

const char* node_kind_name(NodeKind k);

// Scalar circuits compute one value per evaluation (their root has no
// clock); stream circuits run the root clock, one step per call.
enum class CircuitKind { Scalar, Stream };

// Fixpoint scopes are bracketed by delta0 / stream-sum and run until their
// termination test holds; row scopes consume and produce one stream value
// per parent step (the lifting of a stream circuit).
enum class ScopeKind { Root, Fixpoint, Row };

struct Node {
  NodeKind kind = NodeKind::Lifted;
  std::vector<NodeId> inputs;
  int scope = 0;
  // Clock index for delay/integrate/differentiate. A scope at depth d runs
  // clock d; an operator on clock d-1 inside it keeps one state per inner
  // time index (the lifted operator of the enclosing clock).
  int dim = 0;
  // Integrate/differentiate that wraps a whole circuit (naive incremental
  // form); the optimizer pushes these through.
  bool bracket = false;
  // Source carrying a per-step clock value (window bound) rather than data.
  bool clock = false;
  ValueKind source_kind = ValueKind::Any;
  OpPtr op;
  std::string label;
  int child_scope = -1;
  NodeId feedback_from = -1;
};

struct Scope {
  ScopeKind kind = ScopeKind::Root;
  int parent = -1;
  int depth = 0;
  NodeId super = -1;
};

// Decides whether a fixpoint scope may stop after inner step t, given the
// values its exits received at that step. The default is "all zero".
using Termination = std::function<bool(const std::vector<const Value*>& exits, std::size_t t)>;

struct Metrics {
  std::uint64_t tuples = 0;
  std::uint64_t inner_iterations = 0;
  std::uint64_t steps = 0;
};

// Called with the time coordinates (root step first) of every evaluation of
// the probed node.
using Probe = std::function<void(const std::vector<std::size_t>& time, const Value& v)>;

inline constexpr std::size_t kDefaultIterationCap = 1'000'000;

class Circuit {
 public:
  explicit Circuit(CircuitKind kind = CircuitKind::Stream);
  Circuit(const Circuit& other);
  Circuit& operator=(const Circuit& other);
  Circuit(Circuit&&) noexcept;
  Circuit& operator=(Circuit&&) noexcept;
  ~Circuit();

  CircuitKind kind() const { return kind_; }
  void set_kind(CircuitKind k);

  NodeId add_source(const std::string& name, ValueKind kind = ValueKind::ZSet, bool clock = false);
  void add_sink(NodeId node, const std::string& name);

  // Scope of the new node is that of its inputs (all inputs must share
  // one scope); zero-input operators go to `scope`.
  NodeId add_lifted(OpPtr op, std::vector<NodeId> inputs, int scope = 0);
  NodeId add_plus(NodeId a, NodeId b);
  NodeId add_minus(NodeId a, NodeId b);
  NodeId add_negate(NodeId a);
  // dim < 0 selects the clock of the input's scope.
  NodeId add_delay(NodeId in, int dim = -1);
  NodeId add_integrate(NodeId in, int dim = -1);
  NodeId add_differentiate(NodeId in, int dim = -1);

  int add_scope(int parent, ScopeKind kind = ScopeKind::Fixpoint);
  NodeId add_delta0(int scope, NodeId outer);
  NodeId add_stream_sum(NodeId inner);
  NodeId add_row_unpack(int scope, NodeId outer);
  NodeId add_row_pack(NodeId inner);
  NodeId add_feedback_stub(int scope);
  // Closes a cycle: the stub takes the value of `from`. Rejected unless
  // every cycle through the stub passes a delay.
  void connect_feedback(NodeId from, NodeId stub);

  void set_termination(int scope, Termination until);
  // Cap for every fixpoint scope without an explicit one.
  void set_iteration_cap(std::size_t cap);
  void set_scope_cap(int scope, std::size_t cap);
  std::size_t iteration_cap() const { return cap_; }

  // Low-level editing used by the circuit transformations.
  NodeId add_node(Node n);
  Node& mutable_node(NodeId id);
  void set_sink(const std::string& name, NodeId node);
  // Drops nodes that no sink depends on (sources are kept) and renumbers.
  // Returns the old -> new id map (-1 for dropped nodes).
  std::vector<NodeId> compact();

  const Node& node(NodeId id) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const Scope& scope(int id) const;
  std::size_t scope_count() const { return scopes_.size(); }
  const std::map<std::string, NodeId>& sources() const { return sources_; }
  const std::map<std::string, NodeId>& sinks() const { return sinks_; }
  std::vector<NodeId> consumers(NodeId id) const;
  std::vector<NodeId> entries(int scope) const;
  std::vector<NodeId> exits(int scope) const;
  const Termination& termination(int scope) const;
  std::size_t scope_cap(int scope) const;

  // Structural checks; throws CircuitError.
  void validate() const;

  // Runs one root step. Missing sources read as zero.
  std::map<std::string, Value> step(const std::map<std::string, Value>& inputs);
  // Forgets all operator state; the next step is time 0.
  void reset();
  const Metrics& last_metrics() const { return last_; }
  const Metrics& total_metrics() const { return total_; }
  void set_probe(NodeId id, Probe p);
  void clear_probes();

  std::string to_string() const;

 private:
  struct Runtime;
  friend struct Runtime;

  int scope_of_inputs(const std::vector<NodeId>& inputs, int fallback) const;
  int clock_dim(int scope, int dim) const;
  void check_id(NodeId id) const;
  void invalidate();
  Runtime& runtime();

  CircuitKind kind_;
  std::vector<Node> nodes_;
  std::vector<Scope> scopes_;
  std::map<std::string, NodeId> sources_;
  std::map<std::string, NodeId> sinks_;
  std::map<int, Termination> until_;
  std::map<int, std::size_t> caps_;
  std::size_t cap_ = kDefaultIterationCap;
  std::map<NodeId, Probe> probes_;
  std::unique_ptr<Runtime> rt_;
  Metrics last_;
  Metrics total_;
};

// Copies `sub` into `dst` inside `scope`, wiring each source of `sub` to
// the node named in `bindings`. Returns the nodes that `sub`'s sinks map to.
std::map<std::string, NodeId> inline_circuit(Circuit& dst, const Circuit& sub, int scope,
                                             const std::map<std::string, NodeId>& bindings);

// Lifts every operator of c by one clock: a scalar circuit becomes a stream
// circuit; a stream circuit becomes one whose steps consume and produce
// whole streams (rows), evaluated independently per row.
Circuit lift_circuit(const Circuit& c);

// Node counts keyed by node kind name, and by operator name for lifted
// nodes ("join", "distinct", "H", ...).
std::map<std::string, int> census(const Circuit& c);

}  // namespace deltaflow
