#include "deltaflow/incremental.hpp"

#include <algorithm>
#include <functional>

#include "deltaflow/error.hpp"
#include "deltaflow/relational.hpp"
#include "circuit_internal.hpp"

namespace deltaflow {

namespace {

void bump(RewriteStats* stats, const char* rule) {
  if (stats) (*stats)[rule]++;
}

void replace_uses(Circuit& c, NodeId old_id, NodeId new_id) {
  for (NodeId n = 0; n < static_cast<NodeId>(c.node_count()); ++n) {
    const Node& x = c.node(n);
    const bool hit = std::find(x.inputs.begin(), x.inputs.end(), old_id) != x.inputs.end() || x.feedback_from == old_id;
    if (!hit || n == new_id) continue;
    Node& m = c.mutable_node(n);
    for (NodeId& i : m.inputs) {
      if (i == old_id) i = new_id;
    }
    if (m.feedback_from == old_id) m.feedback_from = new_id;
  }
  for (const auto& [name, id] : std::map<std::string, NodeId>(c.sinks())) {
    if (id == old_id) c.set_sink(name, new_id);
  }
}

std::vector<std::vector<NodeId>> users_of(const Circuit& c) {
  std::vector<std::vector<NodeId>> users(c.node_count());
  for (NodeId n = 0; n < static_cast<NodeId>(c.node_count()); ++n) {
    const Node& x = c.node(n);
    for (NodeId i : x.inputs) users[i].push_back(n);
    if (x.feedback_from >= 0) users[x.feedback_from].push_back(n);
  }
  return users;
}

NodeId time_op(Circuit& c, NodeKind kind, NodeId in, int dim) {
  const int s = detail::visible_scope(c, in);
  const int depth = c.scope(s).depth;
  if (dim != depth && dim != depth - 1) {
    throw CircuitError("clock " + std::to_string(dim) + " is not reachable from a scope of depth " +
                       std::to_string(depth));
  }
  switch (kind) {
    case NodeKind::Delay: return c.add_delay(in, dim);
    case NodeKind::Integrate: return c.add_integrate(in, dim);
    default: return c.add_differentiate(in, dim);
  }
}

bool is_bracket(const Node& n, NodeKind kind, int dim) { return n.kind == kind && n.bracket && n.dim == dim; }

// One bracket-pushing pass for clock k.
class Pusher {
 public:
  Pusher(Circuit& c, int k, RewriteStats* stats) : c_(c), k_(k), stats_(stats) {}

  void run() {
    const std::size_t n0 = c_.node_count();
    std::vector<NodeId> roots;
    for (NodeId n = 0; n < static_cast<NodeId>(n0); ++n) {
      if (is_bracket(c_.node(n), NodeKind::Integrate, k_)) roots.push_back(n);
    }
    if (roots.empty()) return;
    region_.assign(n0, 0);
    delta_.assign(n0, -1);
    const auto users = users_of(c_);
    std::vector<NodeId> work = roots;
    for (NodeId r : roots) region_[r] = 1;
    std::vector<NodeId> ends;
    while (!work.empty()) {
      const NodeId n = work.back();
      work.pop_back();
      for (NodeId u : users[n]) {
        if (region_[u]) continue;
        if (is_bracket(c_.node(u), NodeKind::Differentiate, k_)) {
          ends.push_back(u);
          continue;
        }
        region_[u] = 1;
        work.push_back(u);
      }
    }
    // Changes of feedback stubs are new stubs, closed once their source
    // has a change node (the cycle rule).
    std::vector<std::pair<NodeId, NodeId>> stubs;
    for (NodeId n = 0; n < static_cast<NodeId>(n0); ++n) {
      if (region_[n] && c_.node(n).kind == NodeKind::FeedbackStub) {
        delta_[n] = c_.add_feedback_stub(c_.node(n).scope);
        stubs.emplace_back(n, delta_[n]);
        bump(stats_, "cycle");
      }
    }
    std::vector<char> seen(n0, 0);
    std::function<void(NodeId)> visit = [&](NodeId n) {
      if (seen[n]) return;
      seen[n] = 1;
      for (NodeId i : c_.node(n).inputs) {
        if (region_[i]) visit(i);
      }
      if (delta_[n] < 0) delta_[n] = change_of(n);
    };
    for (NodeId n = 0; n < static_cast<NodeId>(n0); ++n) {
      if (region_[n]) visit(n);
    }
    for (const auto& [old_stub, new_stub] : stubs) {
      c_.connect_feedback(delta_[c_.node(old_stub).feedback_from], new_stub);
    }
    for (NodeId d : ends) {
      const NodeId in = c_.node(d).inputs[0];
      replace_uses(c_, d, delta_[in]);
    }
    for (const auto& [name, id] : std::map<std::string, NodeId>(c_.sinks())) {
      if (id < static_cast<NodeId>(n0) && region_[id]) c_.set_sink(name, integrated(id));
    }
  }

 private:
  // Change of a region input, or of a node outside the region.
  NodeId din(NodeId i) {
    if (region_[i]) return delta_[i];
    auto it = diffs_.find(i);
    if (it != diffs_.end()) return it->second;
    return diffs_[i] = time_op(c_, NodeKind::Differentiate, i, k_);
  }

  NodeId integrated(NodeId i) {
    auto it = ints_.find(i);
    if (it != ints_.end()) return it->second;
    return ints_[i] = time_op(c_, NodeKind::Integrate, delta_[i], k_);
  }

  NodeId copy_with(NodeId n, std::vector<NodeId> inputs) {
    Node x = c_.node(n);
    x.inputs = std::move(inputs);
    if (is_time_op(x.kind) && x.dim == k_) x.bracket = false;
    return c_.add_node(std::move(x));
  }

  NodeId change_of(NodeId n) {
    const Node x = c_.node(n);
    switch (x.kind) {
      case NodeKind::Integrate:
        if (x.bracket && x.dim == k_ && !region_[x.inputs[0]]) {
          bump(stats_, "bracket");
          return x.inputs[0];
        }
        [[fallthrough]];
      case NodeKind::Delay:
      case NodeKind::Differentiate:
      case NodeKind::Negate:
      case NodeKind::Delta0:
      case NodeKind::RowUnpack:
        bump(stats_, "time-invariant");
        return copy_with(n, {delta_[x.inputs[0]]});
      case NodeKind::StreamSum:
      case NodeKind::RowPack:
        if (c_.scope(x.scope).depth == k_) {
          throw CircuitError("changes on clock " + std::to_string(k_) + " leave the scope that runs it");
        }
        bump(stats_, "time-invariant");
        return copy_with(n, {delta_[x.inputs[0]]});
      case NodeKind::Plus:
        bump(stats_, "linear");
        return copy_with(n, {din(x.inputs[0]), din(x.inputs[1])});
      case NodeKind::Lifted:
        return lifted_change(n, x);
      default:
        throw CircuitError(std::string("cannot take changes of a ") + node_kind_name(x.kind) + " node");
    }
  }

  NodeId lifted_change(NodeId n, const Node& x) {
    std::vector<NodeId> ins;
    if (const auto* inc = dynamic_cast<const IncJoinOp*>(x.op.get())) {
      for (NodeId i : x.inputs) ins.push_back(din(i));
      bump(stats_, "bilinear");
      return c_.add_lifted(std::make_shared<IncJoinOp>(inc->mask() | (1u << k_), inc->bilinear()), ins);
    }
    switch (x.op->op_class()) {
      case OpClass::Linear:
        for (NodeId i : x.inputs) ins.push_back(din(i));
        bump(stats_, "linear");
        return copy_with(n, ins);
      case OpClass::Bilinear:
        for (NodeId i : x.inputs) ins.push_back(din(i));
        bump(stats_, "bilinear");
        return c_.add_lifted(std::make_shared<IncJoinOp>(1u << k_, x.op), ins);
      case OpClass::Distinct:
        bump(stats_, "distinct");
        return build_inc_distinct(c_, delta_[x.inputs[0]], k_);
      case OpClass::General:
        break;
    }
    if (const NodeId h = nested_distinct(x); h >= 0) return h;
    if (const NodeId w = window(x); w >= 0) return w;
    bump(stats_, "general");
    for (NodeId i : x.inputs) ins.push_back(region_[i] ? integrated(i) : i);
    Node copy = x;
    copy.inputs = ins;
    return time_op(c_, NodeKind::Differentiate, c_.add_node(std::move(copy)), k_);
  }

  // H(z^-1_j I_j d, d) from an earlier pass on the inner clock j = k+1.
  NodeId nested_distinct(const Node& x) {
    if (x.op->tag() != OpTag::H || x.inputs.size() != 2) return -1;
    const Node& past = c_.node(x.inputs[0]);
    if (past.kind != NodeKind::Delay) return -1;
    const Node& acc = c_.node(past.inputs[0]);
    const int j = past.dim;
    if (acc.kind != NodeKind::Integrate || acc.dim != j || acc.inputs[0] != x.inputs[1]) return -1;
    if (j != k_ + 1 || c_.scope(x.scope).depth != j || !region_[x.inputs[1]]) return -1;
    bump(stats_, "nested-distinct");
    const NodeId e = delta_[x.inputs[1]];
    const NodeId inner = c_.add_integrate(e, j);
    const NodeId i_now = c_.add_delay(c_.add_integrate(inner, k_), j);
    const NodeId d_now = c_.add_integrate(e, k_);
    const NodeId part = c_.add_delay(inner, j);
    const NodeId cand = c_.add_integrate(c_.add_lifted(support_op(), {e}), j);
    return c_.add_lifted(nested_h_op(), {i_now, d_now, e, part, cand});
  }

  // A window over integrated data keeps its own in-window rows in a loop
  // instead of integrating everything.
  NodeId window(const Node& x) {
    if (x.op->tag() != OpTag::Window || c_.scope(x.scope).depth != k_) return -1;
    if (region_[x.inputs[1]] || region_[x.inputs[2]]) return -1;
    bump(stats_, "window");
    const NodeId stub = c_.add_feedback_stub(x.scope);
    const NodeId all = c_.add_plus(delta_[x.inputs[0]], c_.add_delay(stub, k_));
    const NodeId out = c_.add_lifted(x.op, {all, x.inputs[1], x.inputs[2]});
    c_.connect_feedback(out, stub);
    return time_op(c_, NodeKind::Differentiate, out, k_);
  }

  Circuit& c_;
  int k_;
  RewriteStats* stats_;
  std::vector<char> region_;
  std::vector<NodeId> delta_;
  std::map<NodeId, NodeId> diffs_;
  std::map<NodeId, NodeId> ints_;
};

NodeId index_side(Circuit& c, const OpPtr& op, NodeId x, bool left) {
  const auto* j = dynamic_cast<const JoinOp*>(op.get());
  if (!j || j->product()) return x;
  return c.add_lifted(index_op(left ? j->left_key() : j->right_key()), {x});
}

// Two clocks k < j: the change of op(I_k I_j a, I_k I_j b) in four terms.
NodeId lower_two(Circuit& c, const OpPtr& op, NodeId a, NodeId b, int k, int j) {
  const NodeId ia = index_side(c, op, a, true);
  const NodeId ib = index_side(c, op, b, false);
  const NodeId ja = c.add_integrate(ia, j);
  const NodeId jb = c.add_integrate(ib, j);
  const NodeId t1 = c.add_lifted(op, {a, c.add_integrate(jb, k)});
  const NodeId t2 = c.add_lifted(op, {c.add_delay(ja, j), c.add_integrate(ib, k)});
  const NodeId t3 = c.add_lifted(op, {c.add_delay(c.add_integrate(ia, k), k), jb});
  const NodeId t4 = c.add_lifted(op, {c.add_delay(c.add_delay(c.add_integrate(ja, k), k), j), b});
  return c.add_plus(c.add_plus(t1, t2), c.add_plus(t3, t4));
}

void lower_inc_joins(Circuit& c, RewriteStats* stats) {
  const std::size_t n0 = c.node_count();
  for (NodeId n = 0; n < static_cast<NodeId>(n0); ++n) {
    const Node x = c.node(n);
    if (x.kind != NodeKind::Lifted) continue;
    const auto* inc = dynamic_cast<const IncJoinOp*>(x.op.get());
    if (!inc) continue;
    std::vector<int> dims;
    for (int d = 0; d < 32; ++d) {
      if (inc->mask() & (1u << d)) dims.push_back(d);
    }
    NodeId out;
    if (dims.size() == 1) {
      out = build_inc_bilinear(c, inc->bilinear(), x.inputs[0], x.inputs[1], dims[0]);
      bump(stats, "bilinear-expansion");
    } else if (dims.size() == 2) {
      out = lower_two(c, inc->bilinear(), x.inputs[0], x.inputs[1], dims[0], dims[1]);
      bump(stats, "nested-bilinear-expansion");
    } else {
      throw CircuitError("incremental join over more than two clocks");
    }
    replace_uses(c, n, out);
  }
}

// I(D x) and D(I x) on one clock are x.
void cancel_pairs(Circuit& c, RewriteStats* stats) {
  bool again = true;
  while (again) {
    again = false;
    for (NodeId n = 0; n < static_cast<NodeId>(c.node_count()); ++n) {
      const Node& x = c.node(n);
      if (x.bracket || (x.kind != NodeKind::Integrate && x.kind != NodeKind::Differentiate)) continue;
      const Node& y = c.node(x.inputs[0]);
      const NodeKind inverse = x.kind == NodeKind::Integrate ? NodeKind::Differentiate : NodeKind::Integrate;
      if (y.kind != inverse || y.bracket || y.dim != x.dim) continue;
      const NodeId target = y.inputs[0];
      bool used = false;
      for (const Node& m : c.nodes()) {
        if (std::find(m.inputs.begin(), m.inputs.end(), n) != m.inputs.end() || m.feedback_from == n) used = true;
      }
      for (const auto& [name, id] : c.sinks()) used = used || id == n;
      if (!used) continue;
      replace_uses(c, n, target);
      bump(stats, "inverse-pair");
      again = true;
    }
  }
}

bool positive_node(const Circuit& c, NodeId n, std::vector<int>& memo) {
  if (memo[n] >= 0) return memo[n];
  memo[n] = 0;  // cycles are not assumed positive
  const Node& x = c.node(n);
  bool p = false;
  switch (x.kind) {
    case NodeKind::Source: p = true; break;
    case NodeKind::Lifted:
      p = x.op->positive();
      for (NodeId i : x.inputs) p = p && positive_node(c, i, memo);
      break;
    case NodeKind::Plus:
    case NodeKind::Delay:
    case NodeKind::Integrate:
    case NodeKind::Delta0:
    case NodeKind::StreamSum:
    case NodeKind::RowUnpack:
    case NodeKind::RowPack:
      p = true;
      for (NodeId i : x.inputs) p = p && positive_node(c, i, memo);
      break;
    default: p = false;
  }
  memo[n] = p ? 1 : 0;
  return p;
}

bool is_distinct(const Node& n) { return n.kind == NodeKind::Lifted && n.op->op_class() == OpClass::Distinct; }

bool absorbs_distinct(const Node& n) {
  if (n.kind == NodeKind::Plus) return true;
  if (n.kind != NodeKind::Lifted) return false;
  switch (n.op->tag()) {
    case OpTag::Filter:
    case OpTag::Project:
    case OpTag::Map:
    case OpTag::Join:
    case OpTag::Product:
    case OpTag::Distinct:
      return true;
    default:
      return false;
  }
}

bool commutes_with_distinct(const Node& n) {
  if (n.kind != NodeKind::Lifted) return false;
  const OpTag t = n.op->tag();
  return t == OpTag::Filter || t == OpTag::Join || t == OpTag::Product;
}

}  // namespace

Circuit incrementalize_naive(const Circuit& in) {
  if (in.kind() != CircuitKind::Stream) throw CircuitError("incrementalize_naive expects a stream circuit");
  Circuit c = in;
  for (const auto& [name, src] : in.sources()) {
    if (c.node(src).clock) continue;
    const auto users = c.consumers(src);
    const NodeId i = c.add_integrate(src, 0);
    c.mutable_node(i).bracket = true;
    for (NodeId u : users) {
      Node& m = c.mutable_node(u);
      for (NodeId& x : m.inputs) {
        if (x == src) x = i;
      }
      if (m.feedback_from == src) m.feedback_from = i;
    }
    for (const auto& [sink, id] : std::map<std::string, NodeId>(c.sinks())) {
      if (id == src) c.set_sink(sink, i);
    }
  }
  for (const auto& [name, id] : std::map<std::string, NodeId>(c.sinks())) {
    const NodeId d = c.add_differentiate(id, 0);
    c.mutable_node(d).bracket = true;
    c.set_sink(name, d);
  }
  return c;
}

Circuit optimize(const Circuit& in, RewriteStats* stats) {
  Circuit c = in;
  int deepest = -1;
  for (const Node& n : c.nodes()) {
    if (n.bracket) deepest = std::max(deepest, n.dim);
  }
  for (int k = deepest; k >= 0; --k) {
    Pusher(c, k, stats).run();
    c.compact();
  }
  lower_inc_joins(c, stats);
  cancel_pairs(c, stats);
  c.compact();
  c.validate();
  return c;
}

Circuit consolidate_distinct(const Circuit& in, RewriteStats* stats) {
  Circuit c = in;
  bool again = true;
  while (again) {
    again = false;
    const auto users = users_of(c);
    auto sole_use = [&](NodeId n) {
      if (users[n].size() != 1) return false;
      for (const auto& [name, id] : c.sinks()) {
        if (id == n) return false;
      }
      return true;
    };
    std::vector<int> memo(c.node_count(), -1);
    for (NodeId n = 0; n < static_cast<NodeId>(c.node_count()) && !again; ++n) {
      const Node& x = c.node(n);
      // distinct(Q(distinct(i))) = distinct(Q(i)) for positive inputs.
      if (is_distinct(x)) {
        const NodeId q = x.inputs[0];
        const Node& qn = c.node(q);
        if (is_distinct(qn)) {
          c.mutable_node(n).inputs[0] = qn.inputs[0];
          bump(stats, "distinct-once");
          again = true;
          continue;
        }
        if (!absorbs_distinct(qn) || !sole_use(q)) continue;
        bool all_positive = true;
        for (NodeId i : qn.inputs) {
          const Node& in_node = c.node(i);
          all_positive = all_positive && positive_node(c, is_distinct(in_node) ? in_node.inputs[0] : i, memo);
        }
        if (!all_positive) continue;
        for (std::size_t k = 0; k < qn.inputs.size(); ++k) {
          const NodeId i = c.node(q).inputs[k];
          if (is_distinct(c.node(i)) && sole_use(i)) {
            c.mutable_node(q).inputs[k] = c.node(i).inputs[0];
            bump(stats, "distinct-once");
            again = true;
          }
        }
        continue;
      }
      // Q(distinct(i)) = distinct(Q(i)) for filter, join and product.
      if (commutes_with_distinct(x)) {
        bool ok = true;
        for (NodeId i : x.inputs) {
          const Node& d = c.node(i);
          ok = ok && is_distinct(d) && sole_use(i) && positive_node(c, d.inputs[0], memo);
        }
        if (!ok) continue;
        Node q = x;
        for (NodeId& i : q.inputs) i = c.node(i).inputs[0];
        const NodeId qn = c.add_node(std::move(q));
        const NodeId dn = c.add_lifted(distinct_op(), {qn});
        replace_uses(c, n, dn);
        bump(stats, "distinct-delay");
        again = true;
      }
    }
    if (again) c.compact();
  }
  return c;
}

Circuit incrementalize(const Circuit& query, RewriteStats* stats) {
  Circuit lifted = query.kind() == CircuitKind::Scalar ? lift_circuit(consolidate_distinct(query, stats)) : query;
  return optimize(incrementalize_naive(lifted), stats);
}

Circuit deincrementalize(const Circuit& in) {
  Circuit c = in;
  for (const auto& [name, src] : in.sources()) {
    if (c.node(src).clock) continue;
    const auto users = c.consumers(src);
    const NodeId d = c.add_differentiate(src, 0);
    for (NodeId u : users) {
      Node& m = c.mutable_node(u);
      for (NodeId& x : m.inputs) {
        if (x == src) x = d;
      }
    }
    for (const auto& [sink, id] : std::map<std::string, NodeId>(c.sinks())) {
      if (id == src) c.set_sink(sink, d);
    }
  }
  for (const auto& [name, id] : std::map<std::string, NodeId>(c.sinks())) {
    c.set_sink(name, c.add_integrate(id, 0));
  }
  return c;
}

std::optional<Divergence> first_divergence(Circuit expected, Circuit actual, const Trace& trace) {
  expected.reset();
  actual.reset();
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto want = expected.step(trace[t]);
    const auto got = actual.step(trace[t]);
    for (const auto& [name, v] : want) {
      auto it = got.find(name);
      const Value g = it == got.end() ? Value() : it->second;
      if (!(g == v)) return Divergence{t, name, v, g};
    }
  }
  return std::nullopt;
}

}  // namespace deltaflow
