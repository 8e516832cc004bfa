#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "deltaflow/aggregate.hpp"
#include "deltaflow/expr.hpp"
#include "deltaflow/value.hpp"

namespace deltaflow {

// Algebraic class of a lifted function; drives the incremental rewrites.
enum class OpClass { Linear, Bilinear, Distinct, General };

const char* class_name(OpClass c);

// What a lifted operator computes, for rewrites that match on shape.
enum class OpTag {
  Filter,
  Map,
  Project,
  Join,
  Product,
  Distinct,
  H,
  Index,
  Flatmap,
  GroupAggregate,
  ScalarAggregate,
  Window,
  IncJoin,
  Function,
};

// Counters shared by all operators of one circuit step.
struct EvalContext {
  std::uint64_t tuples = 0;
};

using Inputs = std::span<const Value* const>;

class Operator {
 public:
  virtual ~Operator() = default;
  virtual std::string name() const = 0;
  virtual OpClass op_class() const = 0;
  virtual OpTag tag() const = 0;
  virtual std::size_t arity() const = 0;
  // Maps positive inputs to positive outputs.
  virtual bool positive() const { return true; }
  virtual Value apply(Inputs in, EvalContext& ctx) const = 0;
  virtual std::string describe() const { return name(); }
};

using OpPtr = std::shared_ptr<const Operator>;

class FilterOp : public Operator {
 public:
  explicit FilterOp(Expr predicate) : pred_(std::move(predicate)) {}
  std::string name() const override { return "filter"; }
  OpClass op_class() const override { return OpClass::Linear; }
  OpTag tag() const override { return OpTag::Filter; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override { return "filter " + pred_.to_string(); }
  const Expr& predicate() const { return pred_; }

 private:
  Expr pred_;
};

// Tuple-wise map; a projection is a map whose outputs are column references.
class MapOp : public Operator {
 public:
  MapOp(ExprList outputs, bool projection) : out_(std::move(outputs)), projection_(projection) {}
  std::string name() const override { return projection_ ? "project" : "map"; }
  OpClass op_class() const override { return OpClass::Linear; }
  OpTag tag() const override { return projection_ ? OpTag::Project : OpTag::Map; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override { return name() + " " + to_string(out_); }
  const ExprList& outputs() const { return out_; }

 private:
  ExprList out_;
  bool projection_;
};

// Equi-join producing concatenated tuples; with empty keys, the cartesian
// product. Either side may arrive pre-indexed by its key (an IndexedZSet).
class JoinOp : public Operator {
 public:
  JoinOp(ExprList left_key, ExprList right_key);
  std::string name() const override { return product() ? "product" : "join"; }
  OpClass op_class() const override { return OpClass::Bilinear; }
  OpTag tag() const override { return product() ? OpTag::Product : OpTag::Join; }
  std::size_t arity() const override { return 2; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override;
  const ExprList& left_key() const { return lk_; }
  const ExprList& right_key() const { return rk_; }
  bool product() const { return lk_.empty(); }

 private:
  ExprList lk_;
  ExprList rk_;
};

class DistinctOp : public Operator {
 public:
  std::string name() const override { return "distinct"; }
  OpClass op_class() const override { return OpClass::Distinct; }
  OpTag tag() const override { return OpTag::Distinct; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
};

// H(i, d): the change of distinct when d is added to i, evaluated over the
// support of d only.
class HOp : public Operator {
 public:
  std::string name() const override { return "H"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::H; }
  std::size_t arity() const override { return 2; }
  bool positive() const override { return false; }
  Value apply(Inputs in, EvalContext& ctx) const override;
};

ZSet distinct_change(const ZSet& i, const ZSet& d);

// Partition by key: ZSet -> IndexedZSet.
class IndexOp : public Operator {
 public:
  explicit IndexOp(ExprList key) : key_(std::move(key)) {}
  std::string name() const override { return "index"; }
  OpClass op_class() const override { return OpClass::Linear; }
  OpTag tag() const override { return OpTag::Index; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override { return "index " + to_string(key_); }
  const ExprList& key() const { return key_; }

 private:
  ExprList key_;
};

class FlatmapOp : public Operator {
 public:
  std::string name() const override { return "flatmap"; }
  OpClass op_class() const override { return OpClass::Linear; }
  OpTag tag() const override { return OpTag::Flatmap; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
};

// GROUP BY key with one aggregate: emits (key..., agg) with weight 1 per
// group.
class GroupAggregateOp : public Operator {
 public:
  GroupAggregateOp(ExprList key, AggKind agg, std::size_t col)
      : key_(std::move(key)), agg_(agg), col_(col) {}
  std::string name() const override { return "aggregate"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::GroupAggregate; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override;

 private:
  ExprList key_;
  AggKind agg_;
  std::size_t col_;
};

// COUNT or SUM of a whole Z-set into the integer/real group. Linear.
class ScalarAggregateOp : public Operator {
 public:
  ScalarAggregateOp(AggKind agg, std::size_t col);
  std::string name() const override { return agg_name(agg_); }
  OpClass op_class() const override { return OpClass::Linear; }
  OpTag tag() const override { return OpTag::ScalarAggregate; }
  std::size_t arity() const override { return 1; }
  bool positive() const override { return false; }
  Value apply(Inputs in, EvalContext& ctx) const override;

 private:
  AggKind agg_;
  std::size_t col_;
};

// Inputs (v, theta, previous theta): keeps tuples of v whose timestamp
// column is at least theta - width. Rejects a decreasing theta.
class WindowOp : public Operator {
 public:
  WindowOp(std::size_t ts_col, Scalar width);
  std::string name() const override { return "window"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::Window; }
  std::size_t arity() const override { return 3; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  std::string describe() const override;

 private:
  std::size_t ts_col_;
  Scalar width_;
};

// Placeholder for the incremental form of a bilinear operator over the
// clock dimensions in mask. Produced and consumed by the optimizer; never
// executed.
class IncJoinOp : public Operator {
 public:
  IncJoinOp(unsigned mask, OpPtr bilinear) : mask_(mask), join_(std::move(bilinear)) {}
  std::string name() const override { return "inc-join"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::IncJoin; }
  std::size_t arity() const override { return 2; }
  Value apply(Inputs in, EvalContext& ctx) const override;
  unsigned mask() const { return mask_; }
  const OpPtr& bilinear() const { return join_; }

 private:
  unsigned mask_;
  OpPtr join_;
};

// Change of distinct on a doubly nested stream, per element of the
// candidate set. Inputs: i and d of the current outer step (as for H), the
// change e of this outer step, the part c of i contributed by this outer
// step, and the candidates (every element e touched at this outer step so
// far). Elements outside the candidates cannot change.
class NestedHOp : public Operator {
 public:
  std::string name() const override { return "H"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::H; }
  std::size_t arity() const override { return 5; }
  bool positive() const override { return false; }
  Value apply(Inputs in, EvalContext& ctx) const override;
};

// Every element of the support with weight 1.
class SupportOp : public Operator {
 public:
  std::string name() const override { return "support"; }
  OpClass op_class() const override { return OpClass::General; }
  OpTag tag() const override { return OpTag::Function; }
  std::size_t arity() const override { return 1; }
  Value apply(Inputs in, EvalContext& ctx) const override;
};

// Host-provided pure function with a declared class. The caller vouches
// for the class label.
class FunctionOp : public Operator {
 public:
  using Fn = std::function<Value(Inputs, EvalContext&)>;
  FunctionOp(std::string name, OpClass cls, std::size_t arity, Fn fn, bool positive = false)
      : name_(std::move(name)), cls_(cls), arity_(arity), fn_(std::move(fn)), positive_(positive) {}
  std::string name() const override { return name_; }
  OpClass op_class() const override { return cls_; }
  OpTag tag() const override { return OpTag::Function; }
  std::size_t arity() const override { return arity_; }
  bool positive() const override { return positive_; }
  Value apply(Inputs in, EvalContext& ctx) const override { return fn_(in, ctx); }

 private:
  std::string name_;
  OpClass cls_;
  std::size_t arity_;
  Fn fn_;
  bool positive_;
};

OpPtr filter_op(Expr predicate);
OpPtr map_op(ExprList outputs);
OpPtr project_op(const std::vector<std::size_t>& cols);
std::shared_ptr<const JoinOp> join_op(ExprList left_key, ExprList right_key);
std::shared_ptr<const JoinOp> product_op();
OpPtr distinct_op();
OpPtr h_op();
OpPtr nested_h_op();
OpPtr support_op();
OpPtr index_op(ExprList key);
OpPtr flatmap_op();
OpPtr group_aggregate_op(ExprList key, AggKind agg, std::size_t col);
OpPtr scalar_aggregate_op(AggKind agg, std::size_t col = 0);
OpPtr window_op(std::size_t ts_col, Scalar width);
// Unary function on integer values, e.g. x -> 2x; class as declared.
OpPtr int_function(std::string name, OpClass cls, std::function<std::int64_t(std::int64_t)> f);

}  // namespace deltaflow
