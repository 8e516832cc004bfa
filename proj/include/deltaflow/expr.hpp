#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "deltaflow/scalar.hpp"

namespace deltaflow {

// Pure expression over the columns of one tuple. Used for filter
// predicates, map outputs and join/group keys. Truth values are the
// integers 1 and 0.
class Expr {
 public:
  enum class Op { Col, Const, Add, Sub, Mul, Div, Mod, Neg, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not };

  static Expr col(std::size_t index);
  static Expr lit(Scalar value);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);

  Op op() const;
  // Column index for Col nodes.
  std::size_t column() const;
  const Scalar& constant() const;
  const std::vector<Expr>& args() const;

  Scalar eval(const Tuple& row) const;
  bool test(const Tuple& row) const;
  // Highest column referenced plus one (0 for constant expressions).
  std::size_t min_arity() const;

  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

const char* op_symbol(Expr::Op op);
// Parses "+", "<=", "and", ... ; throws ValidationError on unknown names.
Expr::Op parse_op(const std::string& symbol);
bool is_unary(Expr::Op op);

inline Expr col(std::size_t i) { return Expr::col(i); }
inline Expr lit(Scalar v) { return Expr::lit(std::move(v)); }
inline Expr lit(int v) { return Expr::lit(Scalar(std::int64_t{v})); }
inline Expr lit(std::int64_t v) { return Expr::lit(Scalar(v)); }
inline Expr lit(double v) { return Expr::lit(make_real(v)); }
inline Expr lit(const char* v) { return Expr::lit(Scalar(std::string(v))); }
Expr eq(Expr a, Expr b);
Expr ne(Expr a, Expr b);
Expr lt(Expr a, Expr b);
Expr le(Expr a, Expr b);
Expr gt(Expr a, Expr b);
Expr ge(Expr a, Expr b);
Expr both(Expr a, Expr b);
Expr either(Expr a, Expr b);
Expr negate_bool(Expr a);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator%(Expr a, Expr b);

using ExprList = std::vector<Expr>;

Tuple eval_all(const ExprList& exprs, const Tuple& row);
// Column references 0..n-1 for the listed columns.
ExprList columns(const std::vector<std::size_t>& cols);
std::string to_string(const ExprList& exprs);

// Strict weak order over scalars that compares numbers by magnitude
// across int/real/rational; used by comparisons and MIN/MAX.
int compare_scalars(const Scalar& a, const Scalar& b);

}  // namespace deltaflow
