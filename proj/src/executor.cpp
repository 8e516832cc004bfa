#include <algorithm>

#include "deltaflow/circuit.hpp"
#include "deltaflow/error.hpp"
#include "circuit_internal.hpp"

namespace deltaflow {

namespace {

const Value kZero;

bool same(const Value& a, const Value& b) {
  if (a.kind() == b.kind() && a.payload() != nullptr && a.payload() == b.payload()) return true;
  return a == b;
}

}  // namespace

struct Circuit::Runtime {
  struct TimeState {
    Value state;
    // Per-inner-index states for operators on the enclosing clock; indices
    // past the end read `tail`.
    std::vector<Value> keyed;
    Value tail;
    std::uint64_t epoch = 0;
  };

  struct ScopePlan {
    std::vector<NodeId> order;
    std::vector<NodeId> stores;  // delays and differentiators
    std::vector<NodeId> resets;  // time operators on this scope's own clock
    std::vector<NodeId> keyed;   // time operators on the enclosing clock
    std::vector<NodeId> entries;
    std::vector<NodeId> exits;
    std::vector<NodeId> clear;
  };

  struct Pending {
    NodeId id;
    Value v;
  };

  const Circuit& c;
  std::vector<Value> val;
  std::vector<TimeState> ts;
  std::vector<char> keyed;
  // For a delay fed by an integrator that has no other consumer: the
  // integrator's id. The pair then runs as one accumulator updated in place.
  std::vector<NodeId> fused_from;
  std::vector<char> fused;
  std::vector<Value> acc;
  std::vector<std::vector<Value>> rows;
  std::vector<ScopePlan> plans;
  std::vector<std::uint64_t> epoch;
  std::vector<char> changed;
  std::vector<std::size_t> time;
  std::size_t root_tick = 0;
  EvalContext ctx;
  std::uint64_t inner = 0;
  std::map<std::string, Value> sink_out;

  explicit Runtime(const Circuit& circuit) : c(circuit) {
    c.validate();
    const std::size_t n = c.nodes_.size();
    val.assign(n, Value());
    ts.assign(n, TimeState{});
    keyed.assign(n, 0);
    fused_from.assign(n, -1);
    fused.assign(n, 0);
    acc.assign(n, Value());
    rows.assign(n, {});
    plans.assign(c.scopes_.size(), ScopePlan{});
    epoch.assign(c.scopes_.size(), 0);
    int max_depth = 0;
    for (const Scope& s : c.scopes_) max_depth = std::max(max_depth, s.depth);
    changed.assign(max_depth + 1, 0);
    time.assign(max_depth + 1, 0);

    std::vector<int> uses(n, 0);
    for (const Node& x : c.nodes_) {
      for (NodeId i : x.inputs) uses[i]++;
      if (x.feedback_from >= 0) uses[x.feedback_from]++;
    }
    for (const auto& [name, id] : c.sinks_) uses[id] += 2;
    for (const auto& [id, p] : c.probes_) uses[id] += 2;

    for (NodeId id = 0; id < static_cast<NodeId>(n); ++id) {
      const Node& x = c.nodes_[id];
      ScopePlan& p = plans[x.scope];
      if (is_time_op(x.kind)) {
        if (x.dim == c.scopes_[x.scope].depth) {
          p.resets.push_back(id);
        } else {
          keyed[id] = 1;
          p.keyed.push_back(id);
        }
        if (x.kind != NodeKind::Integrate) p.stores.push_back(id);
        if (x.kind == NodeKind::Delay) {
          const NodeId src = x.inputs[0];
          const Node& y = c.nodes_[src];
          if (y.kind == NodeKind::Integrate && y.scope == x.scope && y.dim == x.dim && uses[src] == 1) {
            fused_from[id] = src;
            fused[src] = 1;
          }
        }
      }
      if (is_entry(x.kind)) p.entries.push_back(id);
      if (is_exit(x.kind)) {
        p.exits.push_back(id);
        plans[c.scopes_[x.scope].parent].clear.push_back(id);
      } else {
        p.clear.push_back(id);
      }
    }
    for (int s = 0; s < static_cast<int>(c.scopes_.size()); ++s) detail::scope_order(c, s, plans[s].order);
  }

  std::uint64_t key_epoch(NodeId id) const {
    const int parent = c.scopes_[c.nodes_[id].scope].parent;
    return parent < 0 ? 0 : epoch[parent];
  }

  void sync_epoch(NodeId id) {
    TimeState& st = ts[id];
    const std::uint64_t e = key_epoch(id);
    if (st.epoch != e) {
      st.keyed.clear();
      st.tail = Value();
      st.epoch = e;
    }
  }

  const Value& read_state(NodeId id, std::size_t t) {
    TimeState& st = ts[id];
    if (!keyed[id]) return st.state;
    sync_epoch(id);
    return t < st.keyed.size() ? st.keyed[t] : st.tail;
  }

  Value& state_slot(NodeId id, std::size_t t) {
    TimeState& st = ts[id];
    if (!keyed[id]) return st.state;
    sync_epoch(id);
    if (t >= st.keyed.size()) st.keyed.resize(t + 1, st.tail);
    return st.keyed[t];
  }

  std::size_t horizon(int s) {
    std::size_t h = 0;
    for (NodeId id : plans[s].keyed) {
      sync_epoch(id);
      h = std::max(h, ts[id].keyed.size());
    }
    return h;
  }

  void eval(NodeId id, std::size_t t) {
    const Node& x = c.nodes_[id];
    switch (x.kind) {
      case NodeKind::Source:
        break;
      case NodeKind::Lifted: {
        const Value* ptrs[8];
        std::vector<const Value*> many;
        const Value** in = ptrs;
        if (x.inputs.size() > 8) {
          many.resize(x.inputs.size());
          in = many.data();
        }
        for (std::size_t k = 0; k < x.inputs.size(); ++k) in[k] = &val[x.inputs[k]];
        val[id] = x.op->apply(Inputs(in, x.inputs.size()), ctx);
        break;
      }
      case NodeKind::Plus: {
        const Value& a = val[x.inputs[0]];
        const Value& b = val[x.inputs[1]];
        ctx.tuples += a.size() + b.size();
        Value v = a;
        v.add_assign(b);
        val[id] = std::move(v);
        break;
      }
      case NodeKind::Negate:
        ctx.tuples += val[x.inputs[0]].size();
        val[id] = -val[x.inputs[0]];
        break;
      case NodeKind::Delay:
        val[id] = read_state(id, t);
        break;
      case NodeKind::Integrate: {
        if (fused[id]) break;
        const Value& in = val[x.inputs[0]];
        Value& st = state_slot(id, t);
        if (!in.is_zero()) {
          ctx.tuples += in.size();
          st.add_assign(in);
          changed[x.dim] = 1;
        }
        val[id] = st;
        break;
      }
      case NodeKind::Differentiate: {
        const Value& in = val[x.inputs[0]];
        const Value& prev = read_state(id, t);
        ctx.tuples += in.size() + prev.size();
        Value v = in;
        v.add_assign(-prev);
        val[id] = std::move(v);
        break;
      }
      case NodeKind::Delta0:
        val[id] = t == 0 ? val[x.inputs[0]] : Value();
        break;
      case NodeKind::RowUnpack:
        val[id] = val[x.inputs[0]].at(t);
        break;
      case NodeKind::StreamSum:
        acc[id].add_assign(val[x.inputs[0]]);
        break;
      case NodeKind::RowPack:
        rows[id].push_back(val[x.inputs[0]]);
        break;
      case NodeKind::FeedbackStub:
        val[id] = val[x.feedback_from];
        break;
      case NodeKind::Subcircuit:
        run_scope(x.child_scope);
        break;
    }
    if (!c.probes_.empty()) {
      auto it = c.probes_.find(id);
      if (it != c.probes_.end()) {
        const int d = c.scopes_[x.scope].depth;
        std::vector<std::size_t> at(time.begin(), time.begin() + d + 1);
        const Value& shown = x.kind == NodeKind::StreamSum || x.kind == NodeKind::RowPack ? val[x.inputs[0]] : val[id];
        it->second(at, shown);
      }
    }
  }

  // Evaluates one step of scope s at inner time t, then commits delay and
  // differentiator state. Exit values seen at this step go to `exit_vals`.
  void step_scope(int s, std::size_t t, std::vector<Value>* exit_vals) {
    ScopePlan& p = plans[s];
    time[c.scopes_[s].depth] = t;
    for (NodeId id : p.order) eval(id, t);
    if (s == 0) {
      for (const auto& [name, id] : c.sinks_) sink_out[name] = val[id];
    }
    if (exit_vals) {
      exit_vals->clear();
      for (NodeId e : p.exits) exit_vals->push_back(val[c.nodes_[e].inputs[0]]);
    }
    std::vector<Pending> pending;
    pending.reserve(p.stores.size());
    for (NodeId id : p.stores) {
      const NodeId src = fused_from[id] >= 0 ? c.nodes_[fused_from[id]].inputs[0] : c.nodes_[id].inputs[0];
      pending.push_back(Pending{id, val[src]});
    }
    for (NodeId id : p.clear) val[id] = Value();
    for (Pending& q : pending) {
      const Node& x = c.nodes_[q.id];
      Value& st = state_slot(q.id, t);
      if (fused_from[q.id] >= 0) {
        if (!q.v.is_zero()) {
          ctx.tuples += q.v.size();
          st.add_assign(q.v);
          changed[x.dim] = 1;
        }
      } else {
        if (!same(st, q.v)) changed[x.dim] = 1;
        st = std::move(q.v);
      }
    }
  }

  void run_scope(int s) {
    const Scope& sc = c.scopes_[s];
    ScopePlan& p = plans[s];
    epoch[s]++;
    for (NodeId id : p.resets) ts[id].state = Value();
    for (NodeId e : p.exits) {
      acc[e] = Value();
      rows[e].clear();
    }
    const std::size_t h = horizon(s);
    const int d = sc.depth;
    std::size_t steps = 0;
    if (sc.kind == ScopeKind::Row) {
      std::size_t len = h;
      for (NodeId e : p.entries) {
        const Value& row = val[c.nodes_[e].inputs[0]];
        len = std::max(len, row.as_stream().size());
      }
      for (std::size_t t = 0; t < len; ++t) step_scope(s, t, nullptr);
      steps = len;
      for (NodeId e : p.exits) val[e] = Value::stream(std::move(rows[e]));
    } else {
      bool quiet_start = true;
      for (NodeId e : p.entries) {
        if (!val[c.nodes_[e].inputs[0]].is_zero()) quiet_start = false;
      }
      const Termination& until = c.termination(s);
      const std::size_t cap = c.scope_cap(s);
      std::vector<Value> exit_vals;
      std::vector<const Value*> exit_ptrs;
      for (std::size_t t = 0;; ++t) {
        if (t >= cap) {
          throw NonTermination("fixpoint did not converge within " + std::to_string(cap) + " iterations", t);
        }
        changed[d] = 0;
        step_scope(s, t, &exit_vals);
        ++steps;
        bool done;
        if (until) {
          exit_ptrs.clear();
          for (const Value& v : exit_vals) exit_ptrs.push_back(&v);
          done = until(exit_ptrs, t);
        } else {
          done = std::all_of(exit_vals.begin(), exit_vals.end(), [](const Value& v) { return v.is_zero(); });
        }
        // Stop only once every later step would repeat this one: no state of
        // this clock moved, and all per-index state beyond t equals its tail.
        if (done && !changed[d] && t >= h && (t >= 1 || quiet_start)) {
          for (NodeId id : p.keyed) {
            TimeState& st = ts[id];
            if (st.keyed.size() > t) {
              st.tail = std::move(st.keyed[t]);
              st.keyed.resize(t);
            }
          }
          break;
        }
      }
      for (NodeId e : p.exits) val[e] = std::move(acc[e]);
    }
    inner += steps;
  }

  void reset() {
    for (auto& st : ts) st = TimeState{};
    std::fill(epoch.begin(), epoch.end(), 0);
    for (auto& v : val) v = Value();
    root_tick = 0;
  }
};

Circuit::Circuit(CircuitKind kind) : kind_(kind) { scopes_.push_back(Scope{}); }

Circuit::Circuit(const Circuit& other)
    : kind_(other.kind_),
      nodes_(other.nodes_),
      scopes_(other.scopes_),
      sources_(other.sources_),
      sinks_(other.sinks_),
      until_(other.until_),
      caps_(other.caps_),
      cap_(other.cap_),
      probes_(other.probes_) {}

Circuit& Circuit::operator=(const Circuit& other) {
  if (this != &other) {
    Circuit copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Circuit::Circuit(Circuit&&) noexcept = default;
Circuit& Circuit::operator=(Circuit&&) noexcept = default;
Circuit::~Circuit() = default;

void Circuit::invalidate() {
  rt_.reset();
}

Circuit::Runtime& Circuit::runtime() {
  if (!rt_) rt_ = std::make_unique<Runtime>(*this);
  return *rt_;
}

namespace {

bool kind_accepts(ValueKind want, const Value& v) {
  if (want == ValueKind::Any || v.kind() == ValueKind::Zero) return true;
  if (want == ValueKind::Real && v.kind() == ValueKind::Int) return true;
  return v.kind() == want;
}

}  // namespace

std::map<std::string, Value> Circuit::step(const std::map<std::string, Value>& inputs) {
  Runtime& rt = runtime();
  for (const auto& [name, v] : inputs) {
    auto it = sources_.find(name);
    if (it == sources_.end()) throw ValidationError("no source named '" + name + "'");
    const Node& src = nodes_[it->second];
    if (!kind_accepts(src.source_kind, v)) {
      throw TypeMismatch("source '" + name + "' expects " + kind_name(src.source_kind) + ", got " +
                         kind_name(v.kind()));
    }
  }
  for (const auto& [name, id] : sources_) {
    auto it = inputs.find(name);
    rt.val[id] = it == inputs.end() ? Value() : it->second;
  }
  rt.ctx = EvalContext{};
  rt.inner = 0;
  rt.sink_out.clear();
  try {
    rt.step_scope(0, rt.root_tick, nullptr);
  } catch (...) {
    // A failed step leaves operator state half-updated; start over.
    rt_.reset();
    throw;
  }
  rt.root_tick++;
  last_ = Metrics{rt.ctx.tuples, rt.inner, 1};
  total_.tuples += last_.tuples;
  total_.inner_iterations += last_.inner_iterations;
  total_.steps += 1;
  return std::move(rt.sink_out);
}

void Circuit::reset() {
  if (rt_) rt_->reset();
  last_ = Metrics{};
  total_ = Metrics{};
}

}  // namespace deltaflow
