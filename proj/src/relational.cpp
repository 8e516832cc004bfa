#include "deltaflow/relational.hpp"

#include <algorithm>
#include <set>

#include "deltaflow/error.hpp"
#include "circuit_internal.hpp"

namespace deltaflow {

Schema::Schema(std::vector<Column> cols) : cols_(std::move(cols)) {
  std::set<std::string> seen;
  for (const Column& c : cols_) {
    if (!seen.insert(c.name).second) throw ValidationError("duplicate column name '" + c.name + "'");
  }
}

Schema Schema::of(const std::vector<std::string>& names) {
  std::vector<Column> cols;
  for (const auto& n : names) cols.push_back(Column{n, ScalarKind::Any});
  return Schema(std::move(cols));
}

std::size_t Schema::index(const std::string& name) const {
  for (std::size_t i = 0; i < cols_.size(); ++i) {
    if (cols_[i].name == name) return i;
  }
  throw ValidationError("no column named '" + name + "'");
}

bool Schema::has(const std::string& name) const {
  for (const Column& c : cols_) {
    if (c.name == name) return true;
  }
  return false;
}

Schema Schema::select(const std::vector<std::size_t>& cols) const {
  std::vector<Column> out;
  for (std::size_t i : cols) out.push_back(cols_.at(i));
  return Schema(std::move(out));
}

Schema Schema::concat(const Schema& right) const {
  std::vector<Column> out = cols_;
  for (Column c : right.cols_) {
    while (has(c.name) || std::any_of(out.begin() + cols_.size(), out.end(),
                                      [&](const Column& o) { return o.name == c.name; })) {
      c.name += "_r";
    }
    out.push_back(c);
  }
  return Schema(std::move(out));
}

namespace {

bool kinds_compatible(ScalarKind a, ScalarKind b) { return a == ScalarKind::Any || b == ScalarKind::Any || a == b; }

bool value_fits(ScalarKind want, ScalarKind got) {
  if (want == ScalarKind::Any || want == got) return true;
  // Integers are accepted wherever a number is expected.
  return got == ScalarKind::Int && (want == ScalarKind::Real || want == ScalarKind::Rational);
}

}  // namespace

bool Schema::compatible(const Schema& other) const {
  if (arity() != other.arity()) return false;
  for (std::size_t i = 0; i < arity(); ++i) {
    if (!kinds_compatible(cols_[i].kind, other.cols_[i].kind)) return false;
  }
  return true;
}

void Schema::check(const Tuple& t, const std::string& relation) const {
  if (t.size() != arity()) {
    throw ValidationError("relation '" + relation + "' expects " + std::to_string(arity()) + " columns, got " +
                          std::to_string(t.size()));
  }
  for (std::size_t i = 0; i < arity(); ++i) {
    const ScalarKind k = kind_of(t[i]);
    if (!value_fits(cols_[i].kind, k)) {
      throw ValidationError("relation '" + relation + "' column '" + cols_[i].name + "' expects " +
                            kind_name(cols_[i].kind) + ", got " + kind_name(k));
    }
  }
}

Rel add_relation(Circuit& c, const std::string& name, const Schema& schema) {
  return Rel{c.add_source(name, ValueKind::ZSet), schema};
}

namespace {

void require_compatible(const Rel& a, const Rel& b, const char* what) {
  if (!a.schema.compatible(b.schema)) throw ValidationError(std::string(what) + ": schemas differ");
}

std::vector<std::size_t> indices(const Schema& s, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(s.index(n));
  return out;
}

Rel finish(Circuit& c, Rel r, Semantics sem) {
  if (sem == Semantics::Set) r.node = c.add_lifted(distinct_op(), {r.node});
  return r;
}

std::vector<std::size_t> iota(std::size_t n, std::size_t from = 0) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(from + i);
  return out;
}

}  // namespace

Rel build_union_all(Circuit& c, const Rel& a, const Rel& b) {
  require_compatible(a, b, "union");
  return Rel{c.add_plus(a.node, b.node), a.schema};
}

Rel build_union(Circuit& c, const Rel& a, const Rel& b) {
  return finish(c, build_union_all(c, a, b), Semantics::Set);
}

Rel build_projection(Circuit& c, const Rel& in, const std::vector<std::string>& cols, Semantics sem) {
  const auto idx = indices(in.schema, cols);
  return finish(c, Rel{c.add_lifted(project_op(idx), {in.node}), in.schema.select(idx)}, sem);
}

Rel build_map(Circuit& c, const Rel& in, const ExprList& outputs, const Schema& out, Semantics sem) {
  if (outputs.size() != out.arity()) throw ValidationError("map: output schema does not match expressions");
  for (const Expr& e : outputs) {
    if (e.min_arity() > in.schema.arity()) throw ValidationError("map: expression refers past the last column");
  }
  return finish(c, Rel{c.add_lifted(map_op(outputs), {in.node}), out}, sem);
}

Rel build_filter(Circuit& c, const Rel& in, const Expr& predicate, Semantics sem) {
  if (predicate.min_arity() > in.schema.arity()) throw ValidationError("filter: predicate refers past the last column");
  return finish(c, Rel{c.add_lifted(filter_op(predicate), {in.node}), in.schema}, sem);
}

Rel build_cartesian(Circuit& c, const Rel& a, const Rel& b) {
  return Rel{c.add_lifted(product_op(), {a.node, b.node}), a.schema.concat(b.schema)};
}

Rel build_equijoin(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b) {
  if (key_a.size() != key_b.size()) throw ValidationError("join: key lists differ in length");
  auto op = join_op(columns(indices(a.schema, key_a)), columns(indices(b.schema, key_b)));
  return Rel{c.add_lifted(op, {a.node, b.node}), a.schema.concat(b.schema)};
}

Rel build_intersect(Circuit& c, const Rel& a, const Rel& b) {
  require_compatible(a, b, "intersect");
  const auto all = iota(a.schema.arity());
  const NodeId j = c.add_lifted(join_op(columns(all), columns(all)), {a.node, b.node});
  return Rel{c.add_lifted(project_op(all), {j}), a.schema};
}

Rel build_difference(Circuit& c, const Rel& a, const Rel& b) {
  require_compatible(a, b, "difference");
  return finish(c, Rel{c.add_minus(a.node, b.node), a.schema}, Semantics::Set);
}

Rel build_antijoin(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b) {
  if (key_a.size() != key_b.size()) throw ValidationError("antijoin: key lists differ in length");
  const auto kb = indices(b.schema, key_b);
  const NodeId keys = c.add_lifted(distinct_op(), {c.add_lifted(project_op(kb), {b.node})});
  const NodeId matched =
      c.add_lifted(join_op(columns(indices(a.schema, key_a)), columns(iota(kb.size()))), {a.node, keys});
  const NodeId kept = c.add_lifted(project_op(iota(a.schema.arity())), {matched});
  return finish(c, Rel{c.add_minus(a.node, kept), a.schema}, Semantics::Set);
}

Rel build_distinct(Circuit& c, const Rel& in) { return finish(c, in, Semantics::Set); }

Rel build_aggregate(Circuit& c, const Rel& in, const std::vector<std::string>& keys, AggKind agg,
                    const std::string& column, const std::string& out_name) {
  const auto k = indices(in.schema, keys);
  const std::size_t col = agg == AggKind::Count && column.empty() ? 0 : in.schema.index(column);
  std::vector<Column> out;
  for (std::size_t i : k) out.push_back(in.schema.at(i));
  out.push_back(Column{out_name, agg == AggKind::Count ? ScalarKind::Int : ScalarKind::Any});
  return Rel{c.add_lifted(group_aggregate_op(columns(k), agg, col), {in.node}), Schema(std::move(out))};
}

NodeId build_inc_distinct(Circuit& c, NodeId deltas, int dim) {
  const NodeId past = c.add_delay(c.add_integrate(deltas, dim), dim);
  return c.add_lifted(h_op(), {past, deltas});
}

NodeId build_inc_bilinear(Circuit& c, const OpPtr& op, NodeId a, NodeId b, int dim) {
  NodeId sa = a, sb = b;
  if (const auto* j = dynamic_cast<const JoinOp*>(op.get()); j && !j->product()) {
    sa = c.add_lifted(index_op(j->left_key()), {a});
    sb = c.add_lifted(index_op(j->right_key()), {b});
  }
  const NodeId pa = c.add_delay(c.add_integrate(sa, dim), dim);
  const NodeId pb = c.add_delay(c.add_integrate(sb, dim), dim);
  const NodeId now = c.add_lifted(op, {a, b});
  const NodeId left = c.add_lifted(op, {pa, b});
  const NodeId right = c.add_lifted(op, {a, pb});
  return c.add_plus(c.add_plus(now, left), right);
}

Rel build_inc_join(Circuit& c, const Rel& a, const Rel& b, const std::vector<std::string>& key_a,
                   const std::vector<std::string>& key_b) {
  if (key_a.size() != key_b.size()) throw ValidationError("join: key lists differ in length");
  auto op = join_op(columns(indices(a.schema, key_a)), columns(indices(b.schema, key_b)));
  return Rel{build_inc_bilinear(c, op, a.node, b.node), a.schema.concat(b.schema)};
}

Rel build_window(Circuit& c, const Rel& deltas, NodeId theta, const WindowSpec& spec) {
  if (spec.ts_column >= deltas.schema.arity()) throw ValidationError("window: timestamp column out of range");
  const int scope = detail::visible_scope(c, deltas.node);
  const NodeId stub = c.add_feedback_stub(scope);
  const NodeId all = c.add_plus(deltas.node, c.add_delay(stub));
  const NodeId out = c.add_lifted(window_op(spec.ts_column, spec.width), {all, theta, c.add_delay(theta)});
  c.connect_feedback(out, stub);
  return Rel{out, deltas.schema};
}

Rel build_stream_join(Circuit& c, const Rel& relation_deltas, const Rel& events,
                      const std::vector<std::string>& key_rel, const std::vector<std::string>& key_events) {
  const Rel acc{c.add_integrate(relation_deltas.node), relation_deltas.schema};
  return build_equijoin(c, acc, events, key_rel, key_events);
}

}  // namespace deltaflow
