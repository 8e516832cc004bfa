#include "deltaflow/aggregate.hpp"

#include "deltaflow/error.hpp"

namespace deltaflow {

namespace {

// Numeric values compare by magnitude across int/real/rational.
bool value_less(const Scalar& a, const Scalar& b) {
  if (is_numeric(a) && is_numeric(b) && a.index() != b.index()) return to_double(a) < to_double(b);
  return a < b;
}

}  // namespace

const char* agg_name(AggKind k) {
  switch (k) {
    case AggKind::Count: return "count";
    case AggKind::Sum: return "sum";
    case AggKind::Min: return "min";
    case AggKind::Max: return "max";
    case AggKind::Avg: return "avg";
  }
  return "?";
}

AggKind parse_agg(const std::string& name) {
  if (name == "count") return AggKind::Count;
  if (name == "sum") return AggKind::Sum;
  if (name == "min") return AggKind::Min;
  if (name == "max") return AggKind::Max;
  if (name == "avg") return AggKind::Avg;
  throw ValidationError("unknown aggregate '" + name + "'");
}

std::int64_t aggregate_count(const ZSet& m) {
  std::int64_t n = 0;
  for (const auto& [x, w] : m) n = checked_add(n, w);
  return n;
}

Scalar aggregate_sum(const ZSet& m, std::size_t col) {
  std::int64_t isum = 0;
  double rsum = 0.0;
  bool real = false;
  for (const auto& [x, w] : m) {
    if (col >= x.size()) throw TypeMismatch("aggregate column out of range");
    const Scalar& v = x[col];
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      isum = checked_add(isum, checked_mul(*i, w));
    } else if (std::holds_alternative<double>(v) || std::holds_alternative<Rational>(v)) {
      real = true;
      rsum += to_double(v) * static_cast<double>(w);
    } else {
      throw TypeMismatch("SUM over non-numeric column: " + to_string(v));
    }
  }
  if (real) return make_real(rsum + static_cast<double>(isum));
  return isum;
}

Scalar aggregate_general(AggKind f, const ZSet& m, std::size_t col) {
  switch (f) {
    case AggKind::Count: return aggregate_count(m);
    case AggKind::Sum: return aggregate_sum(m, col);
    case AggKind::Avg: {
      const std::int64_t n = aggregate_count(m);
      if (n == 0) throw DomainError("AVG over an input with zero count");
      Scalar s = aggregate_sum(m, col);
      if (const auto* i = std::get_if<std::int64_t>(&s)) return make_rational(*i, n);
      return make_real(to_double(s) / static_cast<double>(n));
    }
    case AggKind::Min:
    case AggKind::Max: {
      if (!is_positive(m)) throw DomainError(std::string(agg_name(f)) + " over a non-positive Z-set");
      if (m.empty()) throw DomainError(std::string(agg_name(f)) + " over an empty Z-set");
      const Scalar* best = nullptr;
      for (const auto& [x, w] : m) {
        if (col >= x.size()) throw TypeMismatch("aggregate column out of range");
        const Scalar& v = x[col];
        if (!best || (f == AggKind::Min ? value_less(v, *best) : value_less(*best, v))) best = &v;
      }
      return *best;
    }
  }
  return std::int64_t{0};
}

ZSet indexed_aggregate(const GroupAggregate& a, const IndexedZSet& g) {
  ZSet out;
  for (const auto& [k, s] : g) out += a(k, s);
  return out;
}

GroupAggregate group_aggregate(AggKind f, std::size_t col) {
  return [f, col](const Tuple& key, const ZSet& group) {
    Tuple row = key;
    row.push_back(aggregate_general(f, group, col));
    return makeset(row);
  };
}

}  // namespace deltaflow
