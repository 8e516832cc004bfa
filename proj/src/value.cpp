#include "deltaflow/value.hpp"

#include <sstream>

#include "deltaflow/error.hpp"

namespace deltaflow {

namespace {

const ZSet kEmptyZSet;
const IndexedZSet kEmptyIndexed;
const std::vector<Value> kEmptyStream;
const Value kZero;

[[noreturn]] void mismatch(const char* want, ValueKind got) {
  throw TypeMismatch(std::string("expected ") + want + ", got " + kind_name(got));
}

}  // namespace

const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Zero: return "zero";
    case ValueKind::Int: return "int";
    case ValueKind::Real: return "real";
    case ValueKind::ZSet: return "zset";
    case ValueKind::Indexed: return "indexed-zset";
    case ValueKind::Pair: return "pair";
    case ValueKind::Stream: return "stream";
    case ValueKind::Any: return "any";
  }
  return "?";
}

Value::Value(ZSet z) : v_(std::make_shared<ZSet>(std::move(z))) {}
Value::Value(IndexedZSet z) : v_(std::make_shared<IndexedZSet>(std::move(z))) {}

Value Value::integer(std::int64_t v) {
  Value out;
  out.v_ = v;
  return out;
}

Value Value::real(double v) {
  if (v != v) throw ValidationError("NaN is not a valid value");
  Value out;
  out.v_ = v;
  return out;
}

Value Value::pair(Value a, Value b) {
  Value out;
  out.v_ = std::make_shared<const PairData>(PairData{std::move(a), std::move(b)});
  return out;
}

Value Value::stream(std::vector<Value> items) {
  Value out;
  out.v_ = std::make_shared<std::vector<Value>>(std::move(items));
  return out;
}

ValueKind Value::kind() const {
  switch (v_.index()) {
    case 0: return ValueKind::Zero;
    case 1: return ValueKind::Int;
    case 2: return ValueKind::Real;
    case 3: return ValueKind::ZSet;
    case 4: return ValueKind::Indexed;
    case 5: return ValueKind::Pair;
    default: return ValueKind::Stream;
  }
}

bool Value::is_zero() const {
  switch (v_.index()) {
    case 0: return true;
    case 1: return std::get<1>(v_) == 0;
    case 2: return std::get<2>(v_) == 0.0;
    case 3: return std::get<3>(v_)->empty();
    case 4: return std::get<4>(v_)->empty();
    case 5: {
      const auto& p = *std::get<5>(v_);
      return p.first.is_zero() && p.second.is_zero();
    }
    default:
      for (const auto& x : *std::get<6>(v_)) {
        if (!x.is_zero()) return false;
      }
      return true;
  }
}

const ZSet& Value::as_zset() const {
  if (v_.index() == 3) return *std::get<3>(v_);
  if (v_.index() == 0) return kEmptyZSet;
  mismatch("zset", kind());
}

const IndexedZSet& Value::as_indexed() const {
  if (v_.index() == 4) return *std::get<4>(v_);
  if (v_.index() == 0) return kEmptyIndexed;
  mismatch("indexed-zset", kind());
}

std::int64_t Value::as_int() const {
  if (v_.index() == 1) return std::get<1>(v_);
  if (v_.index() == 0) return 0;
  mismatch("int", kind());
}

double Value::as_real() const {
  if (v_.index() == 2) return std::get<2>(v_);
  if (v_.index() == 1) return static_cast<double>(std::get<1>(v_));
  if (v_.index() == 0) return 0.0;
  mismatch("real", kind());
}

const Value& Value::first() const {
  if (v_.index() == 5) return std::get<5>(v_)->first;
  if (v_.index() == 0) return kZero;
  mismatch("pair", kind());
}

const Value& Value::second() const {
  if (v_.index() == 5) return std::get<5>(v_)->second;
  if (v_.index() == 0) return kZero;
  mismatch("pair", kind());
}

const std::vector<Value>& Value::as_stream() const {
  if (v_.index() == 6) return *std::get<6>(v_);
  if (v_.index() == 0) return kEmptyStream;
  mismatch("stream", kind());
}

const Value& Value::at(std::size_t t) const {
  const auto& s = as_stream();
  return t < s.size() ? s[t] : kZero;
}

ZSet& Value::mutable_zset() {
  if (v_.index() == 0) v_ = std::make_shared<ZSet>();
  if (v_.index() != 3) mismatch("zset", kind());
  auto& p = std::get<3>(v_);
  if (p.use_count() > 1) p = std::make_shared<ZSet>(*p);
  return *p;
}

void Value::add_assign(const Value& other) {
  const std::size_t a = v_.index();
  const std::size_t b = other.v_.index();
  if (b == 0) return;
  if (a == 0) {
    v_ = other.v_;
    return;
  }
  if (a != b) {
    throw TypeMismatch(std::string("cannot add ") + kind_name(kind()) + " and " +
                       kind_name(other.kind()));
  }
  switch (a) {
    case 1:
      std::get<1>(v_) = checked_add(std::get<1>(v_), std::get<1>(other.v_));
      return;
    case 2:
      std::get<2>(v_) += std::get<2>(other.v_);
      return;
    case 3: {
      auto& p = std::get<3>(v_);
      const auto& q = std::get<3>(other.v_);
      if (q->empty()) return;
      if (p->empty()) {
        p = q;
        return;
      }
      // Accumulate into the larger side when we own it.
      if (p.use_count() > 1) {
        if (q->size() > p->size()) {
          auto fresh = std::make_shared<ZSet>(*q);
          *fresh += *p;
          p = std::move(fresh);
          return;
        }
        p = std::make_shared<ZSet>(*p);
      }
      *p += *q;
      return;
    }
    case 4: {
      auto& p = std::get<4>(v_);
      const auto& q = std::get<4>(other.v_);
      if (q->empty()) return;
      if (p->empty()) {
        p = q;
        return;
      }
      if (p.use_count() > 1) p = std::make_shared<IndexedZSet>(*p);
      *p += *q;
      return;
    }
    case 5: {
      const auto& p = *std::get<5>(v_);
      const auto& q = *std::get<5>(other.v_);
      v_ = std::make_shared<const PairData>(PairData{p.first + q.first, p.second + q.second});
      return;
    }
    default: {
      auto& p = std::get<6>(v_);
      const auto& q = *std::get<6>(other.v_);
      if (p.use_count() > 1) p = std::make_shared<std::vector<Value>>(*p);
      if (p->size() < q.size()) p->resize(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) (*p)[i].add_assign(q[i]);
      return;
    }
  }
}

Value Value::operator-() const {
  Value out;
  switch (v_.index()) {
    case 0: return out;
    case 1: out.v_ = checked_neg(std::get<1>(v_)); return out;
    case 2: out.v_ = -std::get<2>(v_); return out;
    case 3: return Value(-*std::get<3>(v_));
    case 4: return Value(-*std::get<4>(v_));
    case 5: {
      const auto& p = *std::get<5>(v_);
      return pair(-p.first, -p.second);
    }
    default: {
      std::vector<Value> items;
      items.reserve(std::get<6>(v_)->size());
      for (const auto& x : *std::get<6>(v_)) items.push_back(-x);
      return stream(std::move(items));
    }
  }
}

bool operator==(const Value& a, const Value& b) {
  const std::size_t i = a.v_.index();
  const std::size_t j = b.v_.index();
  if (i == 0 || j == 0) return (i == 0 || a.is_zero()) && (j == 0 || b.is_zero());
  if (i != j) {
    // Int and Real zero are both zero; otherwise different groups differ.
    return a.is_zero() && b.is_zero();
  }
  switch (i) {
    case 1: return std::get<1>(a.v_) == std::get<1>(b.v_);
    case 2: return std::get<2>(a.v_) == std::get<2>(b.v_);
    case 3: {
      const auto& p = std::get<3>(a.v_);
      const auto& q = std::get<3>(b.v_);
      return p == q || *p == *q;
    }
    case 4: {
      const auto& p = std::get<4>(a.v_);
      const auto& q = std::get<4>(b.v_);
      return p == q || *p == *q;
    }
    case 5: {
      const auto& p = *std::get<5>(a.v_);
      const auto& q = *std::get<5>(b.v_);
      return p.first == q.first && p.second == q.second;
    }
    default: {
      const auto& p = *std::get<6>(a.v_);
      const auto& q = *std::get<6>(b.v_);
      const std::size_t n = std::max(p.size(), q.size());
      for (std::size_t t = 0; t < n; ++t) {
        if (!(a.at(t) == b.at(t))) return false;
      }
      return true;
    }
  }
}

const void* Value::payload() const {
  switch (v_.index()) {
    case 3: return std::get<3>(v_).get();
    case 4: return std::get<4>(v_).get();
    case 5: return std::get<5>(v_).get();
    case 6: return std::get<6>(v_).get();
    default: return nullptr;
  }
}

std::size_t Value::size() const {
  switch (v_.index()) {
    case 0: return 0;
    case 3: return std::get<3>(v_)->size();
    case 4: return std::get<4>(v_)->entry_count();
    case 5: return std::get<5>(v_)->first.size() + std::get<5>(v_)->second.size();
    case 6: {
      std::size_t n = 0;
      for (const auto& x : *std::get<6>(v_)) n += x.size();
      return n;
    }
    default: return is_zero() ? 0 : 1;
  }
}

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Zero: return "0";
    case ValueKind::Int: return std::to_string(v.as_int());
    case ValueKind::Real: return to_string(Scalar(v.as_real()));
    case ValueKind::ZSet: return to_string(v.as_zset());
    case ValueKind::Indexed: return to_string(v.as_indexed());
    case ValueKind::Pair: return "<" + to_string(v.first()) + ", " + to_string(v.second()) + ">";
    default: {
      std::string out = "[";
      bool first = true;
      for (const auto& x : v.as_stream()) {
        if (!first) out += " ";
        first = false;
        out += to_string(x);
      }
      return out + "]";
    }
  }
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << to_string(v); }

Value int_stream(const std::vector<std::int64_t>& xs) {
  std::vector<Value> items;
  items.reserve(xs.size());
  for (auto x : xs) items.push_back(Value::integer(x));
  return Value::stream(std::move(items));
}

}  // namespace deltaflow
