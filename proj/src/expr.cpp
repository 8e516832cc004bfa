#include "deltaflow/expr.hpp"

#include "deltaflow/error.hpp"
#include "deltaflow/weight.hpp"

namespace deltaflow {

struct Expr::Node {
  Op op;
  std::size_t column = 0;
  Scalar constant;
  std::vector<Expr> args;
};

Expr Expr::col(std::size_t index) {
  return Expr(std::make_shared<const Node>(Node{Op::Col, index, Scalar{}, {}}));
}

Expr Expr::lit(Scalar value) {
  if (const auto* d = std::get_if<double>(&value)) value = make_real(*d);
  return Expr(std::make_shared<const Node>(Node{Op::Const, 0, std::move(value), {}}));
}

Expr Expr::unary(Op op, Expr a) {
  if (!is_unary(op)) throw ValidationError(std::string("operator '") + op_symbol(op) + "' is not unary");
  return Expr(std::make_shared<const Node>(Node{op, 0, Scalar{}, {std::move(a)}}));
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  if (op == Op::Col || op == Op::Const || is_unary(op)) {
    throw ValidationError(std::string("operator '") + op_symbol(op) + "' is not binary");
  }
  return Expr(std::make_shared<const Node>(Node{op, 0, Scalar{}, {std::move(a), std::move(b)}}));
}

Expr::Op Expr::op() const { return node_->op; }
std::size_t Expr::column() const { return node_->column; }
const Scalar& Expr::constant() const { return node_->constant; }
const std::vector<Expr>& Expr::args() const { return node_->args; }

bool is_unary(Expr::Op op) { return op == Expr::Op::Neg || op == Expr::Op::Not; }

const char* op_symbol(Expr::Op op) {
  using O = Expr::Op;
  switch (op) {
    case O::Col: return "col";
    case O::Const: return "lit";
    case O::Add: return "+";
    case O::Sub: return "-";
    case O::Mul: return "*";
    case O::Div: return "/";
    case O::Mod: return "%";
    case O::Neg: return "neg";
    case O::Eq: return "=";
    case O::Ne: return "!=";
    case O::Lt: return "<";
    case O::Le: return "<=";
    case O::Gt: return ">";
    case O::Ge: return ">=";
    case O::And: return "and";
    case O::Or: return "or";
    case O::Not: return "not";
  }
  return "?";
}

Expr::Op parse_op(const std::string& s) {
  using O = Expr::Op;
  if (s == "+") return O::Add;
  if (s == "-") return O::Sub;
  if (s == "*") return O::Mul;
  if (s == "/") return O::Div;
  if (s == "%") return O::Mod;
  if (s == "neg") return O::Neg;
  if (s == "=" || s == "==") return O::Eq;
  if (s == "!=" || s == "<>") return O::Ne;
  if (s == "<") return O::Lt;
  if (s == "<=") return O::Le;
  if (s == ">") return O::Gt;
  if (s == ">=") return O::Ge;
  if (s == "and") return O::And;
  if (s == "or") return O::Or;
  if (s == "not") return O::Not;
  throw ValidationError("unknown operator '" + s + "'");
}

int compare_scalars(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index() && is_numeric(a) && is_numeric(b)) {
    const double x = to_double(a);
    const double y = to_double(b);
    if (x < y) return -1;
    if (y < x) return 1;
    // Break ties by kind so the order stays strict.
    return a.index() < b.index() ? -1 : 1;
  }
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

namespace {

Scalar truth(bool b) { return std::int64_t{b ? 1 : 0}; }

bool truthy(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return *i != 0;
  throw TypeMismatch("expected a truth value, got " + to_string(s));
}

bool numeric_equal(const Scalar& a, const Scalar& b) {
  if (a.index() == b.index()) return a == b;
  if (is_numeric(a) && is_numeric(b)) return to_double(a) == to_double(b);
  return false;
}

Scalar arith(Expr::Op op, const Scalar& a, const Scalar& b) {
  using O = Expr::Op;
  if (!is_numeric(a) || !is_numeric(b)) {
    if (op == O::Add && std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
      return std::get<std::string>(a) + std::get<std::string>(b);
    }
    throw TypeMismatch(std::string("arithmetic '") + op_symbol(op) + "' on non-numeric values " +
                       to_string(a) + ", " + to_string(b));
  }
  const auto* ia = std::get_if<std::int64_t>(&a);
  const auto* ib = std::get_if<std::int64_t>(&b);
  if (ia && ib) {
    switch (op) {
      case O::Add: return checked_add(*ia, *ib);
      case O::Sub: return checked_add(*ia, checked_neg(*ib));
      case O::Mul: return checked_mul(*ia, *ib);
      case O::Div:
        if (*ib == 0) throw DomainError("division by zero");
        return make_rational(*ia, *ib);
      case O::Mod:
        if (*ib == 0) throw DomainError("modulo by zero");
        return *ia % *ib;
      default: break;
    }
  }
  const double x = to_double(a);
  const double y = to_double(b);
  switch (op) {
    case O::Add: return make_real(x + y);
    case O::Sub: return make_real(x - y);
    case O::Mul: return make_real(x * y);
    case O::Div:
      if (y == 0.0) throw DomainError("division by zero");
      return make_real(x / y);
    default: throw TypeMismatch("'%' needs integer operands");
  }
}

}  // namespace

Scalar Expr::eval(const Tuple& row) const {
  const Node& n = *node_;
  using O = Op;
  switch (n.op) {
    case O::Col:
      if (n.column >= row.size()) {
        throw ValidationError("column " + std::to_string(n.column) + " out of range for tuple " +
                              deltaflow::to_string(row));
      }
      return row[n.column];
    case O::Const: return n.constant;
    case O::Neg: {
      Scalar v = n.args[0].eval(row);
      if (const auto* i = std::get_if<std::int64_t>(&v)) return checked_neg(*i);
      if (const auto* d = std::get_if<double>(&v)) return make_real(-*d);
      if (const auto* r = std::get_if<Rational>(&v)) return make_rational(-r->num, r->den);
      throw TypeMismatch("negation of non-numeric value");
    }
    case O::Not: return truth(!truthy(n.args[0].eval(row)));
    case O::And: return truth(truthy(n.args[0].eval(row)) && truthy(n.args[1].eval(row)));
    case O::Or: return truth(truthy(n.args[0].eval(row)) || truthy(n.args[1].eval(row)));
    default: break;
  }
  const Scalar a = n.args[0].eval(row);
  const Scalar b = n.args[1].eval(row);
  switch (n.op) {
    case O::Eq: return truth(numeric_equal(a, b));
    case O::Ne: return truth(!numeric_equal(a, b));
    case O::Lt:
    case O::Le:
    case O::Gt:
    case O::Ge: {
      if (is_numeric(a) != is_numeric(b)) {
        throw TypeMismatch("cannot order " + deltaflow::to_string(a) + " against " + deltaflow::to_string(b));
      }
      const int c = numeric_equal(a, b) ? 0 : compare_scalars(a, b);
      if (n.op == O::Lt) return truth(c < 0);
      if (n.op == O::Le) return truth(c <= 0);
      if (n.op == O::Gt) return truth(c > 0);
      return truth(c >= 0);
    }
    default: return arith(n.op, a, b);
  }
}

bool Expr::test(const Tuple& row) const { return truthy(eval(row)); }

std::size_t Expr::min_arity() const {
  if (node_->op == Op::Col) return node_->column + 1;
  std::size_t n = 0;
  for (const auto& a : node_->args) n = std::max(n, a.min_arity());
  return n;
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Col: return "$" + std::to_string(n.column);
    case Op::Const: {
      if (std::holds_alternative<std::string>(n.constant)) return "'" + std::get<std::string>(n.constant) + "'";
      return deltaflow::to_string(n.constant);
    }
    case Op::Neg: return "-(" + n.args[0].to_string() + ")";
    case Op::Not: return "not(" + n.args[0].to_string() + ")";
    default:
      return "(" + n.args[0].to_string() + " " + op_symbol(n.op) + " " + n.args[1].to_string() + ")";
  }
}

Expr eq(Expr a, Expr b) { return Expr::binary(Expr::Op::Eq, std::move(a), std::move(b)); }
Expr ne(Expr a, Expr b) { return Expr::binary(Expr::Op::Ne, std::move(a), std::move(b)); }
Expr lt(Expr a, Expr b) { return Expr::binary(Expr::Op::Lt, std::move(a), std::move(b)); }
Expr le(Expr a, Expr b) { return Expr::binary(Expr::Op::Le, std::move(a), std::move(b)); }
Expr gt(Expr a, Expr b) { return Expr::binary(Expr::Op::Gt, std::move(a), std::move(b)); }
Expr ge(Expr a, Expr b) { return Expr::binary(Expr::Op::Ge, std::move(a), std::move(b)); }
Expr both(Expr a, Expr b) { return Expr::binary(Expr::Op::And, std::move(a), std::move(b)); }
Expr either(Expr a, Expr b) { return Expr::binary(Expr::Op::Or, std::move(a), std::move(b)); }
Expr negate_bool(Expr a) { return Expr::unary(Expr::Op::Not, std::move(a)); }
Expr operator+(Expr a, Expr b) { return Expr::binary(Expr::Op::Add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(Expr::Op::Sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(Expr::Op::Mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(Expr::Op::Div, std::move(a), std::move(b)); }
Expr operator%(Expr a, Expr b) { return Expr::binary(Expr::Op::Mod, std::move(a), std::move(b)); }

Tuple eval_all(const ExprList& exprs, const Tuple& row) {
  Tuple out;
  out.reserve(exprs.size());
  for (const auto& e : exprs) out.push_back(e.eval(row));
  return out;
}

ExprList columns(const std::vector<std::size_t>& cols) {
  ExprList out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(Expr::col(c));
  return out;
}

std::string to_string(const ExprList& exprs) {
  std::string out = "(";
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    if (i) out += ", ";
    out += exprs[i].to_string();
  }
  return out + ")";
}

}  // namespace deltaflow
