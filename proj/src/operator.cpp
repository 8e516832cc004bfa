#include "deltaflow/operator.hpp"

#include <unordered_map>

#include "deltaflow/error.hpp"

namespace deltaflow {

const char* class_name(OpClass c) {
  switch (c) {
    case OpClass::Linear: return "linear";
    case OpClass::Bilinear: return "bilinear";
    case OpClass::Distinct: return "distinct";
    case OpClass::General: return "general";
  }
  return "?";
}

Value FilterOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  ZSet out;
  for (const auto& [x, w] : m) {
    if (pred_.test(x)) out.add(x, w);
  }
  return out;
}

Value MapOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  ZSet out;
  for (const auto& [x, w] : m) out.add(eval_all(out_, x), w);
  return out;
}

JoinOp::JoinOp(ExprList left_key, ExprList right_key) : lk_(std::move(left_key)), rk_(std::move(right_key)) {
  if (lk_.size() != rk_.size()) throw ValidationError("join keys have different lengths");
}

std::string JoinOp::describe() const {
  if (product()) return "product";
  return "join " + to_string(lk_) + " = " + to_string(rk_);
}

namespace {

void emit_pairs(ZSet& out, const Tuple& x, Weight wx, const ZSet& ys, bool x_left, EvalContext& ctx) {
  ctx.tuples += ys.size();
  for (const auto& [y, wy] : ys) {
    out.add(x_left ? concat(x, y) : concat(y, x), checked_mul(wx, wy));
  }
}

}  // namespace

Value JoinOp::apply(Inputs in, EvalContext& ctx) const {
  const Value& a = *in[0];
  const Value& b = *in[1];
  ZSet out;
  if (a.is_zero() || b.is_zero()) return out;
  const bool ai = a.kind() == ValueKind::Indexed;
  const bool bi = b.kind() == ValueKind::Indexed;
  if (ai && bi) {
    const IndexedZSet& l = a.as_indexed();
    const IndexedZSet& r = b.as_indexed();
    const bool left_small = l.size() <= r.size();
    const IndexedZSet& small = left_small ? l : r;
    const IndexedZSet& big = left_small ? r : l;
    for (const auto& [k, xs] : small) {
      const ZSet& ys = big.group(k);
      ctx.tuples += xs.size();
      if (ys.empty()) continue;
      for (const auto& [x, wx] : xs) emit_pairs(out, x, wx, ys, left_small, ctx);
    }
    return out;
  }
  if (ai || bi) {
    const IndexedZSet& idx = ai ? a.as_indexed() : b.as_indexed();
    const ZSet& flat = ai ? b.as_zset() : a.as_zset();
    const ExprList& key = ai ? rk_ : lk_;
    ctx.tuples += flat.size();
    for (const auto& [x, wx] : flat) {
      const ZSet& ys = idx.group(eval_all(key, x));
      if (!ys.empty()) emit_pairs(out, x, wx, ys, !ai, ctx);
    }
    return out;
  }
  const ZSet& l = a.as_zset();
  const ZSet& r = b.as_zset();
  ctx.tuples += l.size() + r.size();
  if (product()) {
    for (const auto& [x, wx] : l) emit_pairs(out, x, wx, r, true, ctx);
    return out;
  }
  // Hash the smaller side, probe with the larger.
  const bool left_small = l.size() <= r.size();
  const ZSet& small = left_small ? l : r;
  const ZSet& big = left_small ? r : l;
  const ExprList& small_key = left_small ? lk_ : rk_;
  const ExprList& big_key = left_small ? rk_ : lk_;
  std::unordered_map<Tuple, std::vector<std::pair<const Tuple*, Weight>>, TupleHash> index;
  index.reserve(small.size());
  for (const auto& [x, w] : small) index[eval_all(small_key, x)].emplace_back(&x, w);
  for (const auto& [y, wy] : big) {
    auto it = index.find(eval_all(big_key, y));
    if (it == index.end()) continue;
    ctx.tuples += it->second.size();
    for (const auto& [x, wx] : it->second) {
      out.add(left_small ? concat(*x, y) : concat(y, *x), checked_mul(wx, wy));
    }
  }
  return out;
}

Value DistinctOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  return distinct(m);
}

ZSet distinct_change(const ZSet& i, const ZSet& d) {
  ZSet out;
  for (const auto& [x, dw] : d) {
    const Weight before = i.weight(x);
    const Weight after = checked_add(before, dw);
    if (before > 0 && after <= 0) {
      out.add(x, -1);
    } else if (before <= 0 && after > 0) {
      out.add(x, 1);
    }
  }
  return out;
}

Value HOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& d = in[1]->as_zset();
  ctx.tuples += d.size();
  return distinct_change(in[0]->as_zset(), d);
}

namespace {

int h_sign(Weight before, Weight d) {
  const Weight after = checked_add(before, d);
  if (before > 0 && after <= 0) return -1;
  if (before <= 0 && after > 0) return 1;
  return 0;
}

}  // namespace

Value NestedHOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& cand = in[4]->as_zset();
  if (cand.empty()) return ZSet{};
  const ZSet& i = in[0]->as_zset();
  const ZSet& d = in[1]->as_zset();
  const ZSet& e = in[2]->as_zset();
  const ZSet& c = in[3]->as_zset();
  ctx.tuples += cand.size();
  ZSet out;
  for (const auto& [x, unused] : cand) {
    const Weight iw = i.weight(x);
    const Weight dw = d.weight(x);
    const int now = h_sign(iw, dw);
    const int before = h_sign(checked_add(iw, checked_neg(c.weight(x))), checked_add(dw, checked_neg(e.weight(x))));
    if (now != before) out.add(x, now - before);
  }
  return out;
}

Value SupportOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  ZSet out;
  for (const auto& [x, w] : m) out.add(x, 1);
  return out;
}

Value IndexOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  IndexedZSet out;
  for (const auto& [x, w] : m) out.add(eval_all(key_, x), x, w);
  return out;
}

Value FlatmapOp::apply(Inputs in, EvalContext& ctx) const {
  const IndexedZSet& g = in[0]->as_indexed();
  ctx.tuples += g.entry_count();
  return flatmap(g);
}

std::string GroupAggregateOp::describe() const {
  return std::string("aggregate ") + agg_name(agg_) + "($" + std::to_string(col_) + ") by " + to_string(key_);
}

Value GroupAggregateOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  IndexedZSet groups;
  for (const auto& [x, w] : m) groups.add(eval_all(key_, x), x, w);
  return indexed_aggregate(group_aggregate(agg_, col_), groups);
}

ScalarAggregateOp::ScalarAggregateOp(AggKind agg, std::size_t col) : agg_(agg), col_(col) {
  if (agg != AggKind::Count && agg != AggKind::Sum) {
    throw ValidationError("only COUNT and SUM are linear scalar aggregates");
  }
}

Value ScalarAggregateOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  ctx.tuples += m.size();
  if (agg_ == AggKind::Count) return Value::integer(aggregate_count(m));
  Scalar s = aggregate_sum(m, col_);
  if (const auto* i = std::get_if<std::int64_t>(&s)) return Value::integer(*i);
  return Value::real(to_double(s));
}

WindowOp::WindowOp(std::size_t ts_col, Scalar width) : ts_col_(ts_col), width_(std::move(width)) {
  if (!is_numeric(width_) || !(to_double(width_) > 0)) throw ValidationError("window width must be positive");
}

std::string WindowOp::describe() const {
  return "window $" + std::to_string(ts_col_) + " width " + to_string(width_);
}

namespace {

Scalar as_scalar(const Value& v) {
  if (v.kind() == ValueKind::Real) return make_real(v.as_real());
  return v.as_int();
}

}  // namespace

Value WindowOp::apply(Inputs in, EvalContext& ctx) const {
  const ZSet& m = in[0]->as_zset();
  const Value& theta = *in[1];
  const Value& prev = *in[2];
  if (prev.kind() != ValueKind::Zero) {
    const bool ints = theta.kind() == ValueKind::Int && prev.kind() == ValueKind::Int;
    if (ints ? theta.as_int() < prev.as_int() : theta.as_real() < prev.as_real()) {
      throw DomainError("window bound decreased from " + to_string(prev) + " to " + to_string(theta));
    }
  }
  const Scalar th = as_scalar(theta);
  const bool exact = std::holds_alternative<std::int64_t>(th) && std::holds_alternative<std::int64_t>(width_);
  ctx.tuples += m.size();
  ZSet out;
  for (const auto& [x, w] : m) {
    if (ts_col_ >= x.size() || !is_numeric(x[ts_col_])) throw TypeMismatch("window timestamp column is not numeric");
    const Scalar& ts = x[ts_col_];
    bool keep;
    if (exact && std::holds_alternative<std::int64_t>(ts)) {
      keep = std::get<std::int64_t>(ts) >= checked_add(std::get<std::int64_t>(th), checked_neg(std::get<std::int64_t>(width_)));
    } else {
      keep = to_double(ts) >= to_double(th) - to_double(width_);
    }
    if (keep) out.add(x, w);
  }
  return out;
}

Value IncJoinOp::apply(Inputs, EvalContext&) const {
  throw CircuitError("incremental join placeholder reached execution without being lowered");
}

OpPtr filter_op(Expr predicate) { return std::make_shared<FilterOp>(std::move(predicate)); }
OpPtr map_op(ExprList outputs) { return std::make_shared<MapOp>(std::move(outputs), false); }
OpPtr project_op(const std::vector<std::size_t>& cols) { return std::make_shared<MapOp>(columns(cols), true); }
std::shared_ptr<const JoinOp> join_op(ExprList left_key, ExprList right_key) {
  return std::make_shared<JoinOp>(std::move(left_key), std::move(right_key));
}
std::shared_ptr<const JoinOp> product_op() { return std::make_shared<JoinOp>(ExprList{}, ExprList{}); }
OpPtr distinct_op() { return std::make_shared<DistinctOp>(); }
OpPtr h_op() { return std::make_shared<HOp>(); }
OpPtr nested_h_op() { return std::make_shared<NestedHOp>(); }
OpPtr support_op() { return std::make_shared<SupportOp>(); }
OpPtr index_op(ExprList key) { return std::make_shared<IndexOp>(std::move(key)); }
OpPtr flatmap_op() { return std::make_shared<FlatmapOp>(); }
OpPtr group_aggregate_op(ExprList key, AggKind agg, std::size_t col) {
  return std::make_shared<GroupAggregateOp>(std::move(key), agg, col);
}
OpPtr scalar_aggregate_op(AggKind agg, std::size_t col) { return std::make_shared<ScalarAggregateOp>(agg, col); }
OpPtr window_op(std::size_t ts_col, Scalar width) { return std::make_shared<WindowOp>(ts_col, std::move(width)); }

OpPtr int_function(std::string name, OpClass cls, std::function<std::int64_t(std::int64_t)> f) {
  return std::make_shared<FunctionOp>(
      std::move(name), cls, 1,
      [f = std::move(f)](Inputs in, EvalContext&) { return Value::integer(f(in[0]->as_int())); });
}

}  // namespace deltaflow
