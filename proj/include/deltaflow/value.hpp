#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "deltaflow/zset.hpp"

namespace deltaflow {

enum class ValueKind { Zero, Int, Real, ZSet, Indexed, Pair, Stream, Any };

const char* kind_name(ValueKind k);

// An element of one of the abelian groups circuits compute over. Zero is a
// polymorphic identity that adds to anything. Collection payloads are shared
// and copied on write, so passing a Value along an edge is cheap and an
// integrator that owns the only reference can accumulate in place.
class Value {
 public:
  struct PairData;

  Value() = default;
  Value(ZSet z);
  Value(IndexedZSet z);

  static Value zero() { return Value(); }
  static Value integer(std::int64_t v);
  static Value real(double v);
  static Value pair(Value a, Value b);
  // A finite stream prefix; positions past the end are zero.
  static Value stream(std::vector<Value> items);

  ValueKind kind() const;
  bool is_zero() const;

  // Accessors treat Zero as the empty element of the requested group.
  const ZSet& as_zset() const;
  const IndexedZSet& as_indexed() const;
  std::int64_t as_int() const;
  double as_real() const;
  const Value& first() const;
  const Value& second() const;
  const std::vector<Value>& as_stream() const;
  // Element t of a stream value; zero past the end.
  const Value& at(std::size_t t) const;

  // Mutable access; detaches a shared payload first.
  ZSet& mutable_zset();

  void add_assign(const Value& other);
  Value operator-() const;
  friend Value operator+(Value a, const Value& b) {
    a.add_assign(b);
    return a;
  }
  friend Value operator-(Value a, const Value& b) {
    a.add_assign(-b);
    return a;
  }
  friend bool operator==(const Value& a, const Value& b);

  // Identity of the shared payload, for cheap "unchanged" checks.
  const void* payload() const;
  // Entry count for collections, 1 for nonzero scalars.
  std::size_t size() const;

 private:
  using Payload = std::variant<std::monostate, std::int64_t, double, std::shared_ptr<ZSet>,
                               std::shared_ptr<IndexedZSet>, std::shared_ptr<const PairData>,
                               std::shared_ptr<std::vector<Value>>>;
  Payload v_;
};

struct Value::PairData {
  Value first;
  Value second;
};

std::string to_string(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

// Builds a stream value from plain integers (test and example convenience).
Value int_stream(const std::vector<std::int64_t>& xs);

}  // namespace deltaflow
