#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "deltaflow/zset.hpp"

namespace deltaflow {

enum class AggKind { Count, Sum, Min, Max, Avg };

const char* agg_name(AggKind k);
AggKind parse_agg(const std::string& name);

// Sum of all weights. Linear.
std::int64_t aggregate_count(const ZSet& m);
// Weighted sum of column col. Int when every value is an integer, Real
// otherwise. Linear.
Scalar aggregate_sum(const ZSet& m, std::size_t col);
// MIN/MAX over the underlying set (requires a positive Z-set); AVG as
// SUM / COUNT, exact when both are integers.
Scalar aggregate_general(AggKind f, const ZSet& m, std::size_t col);

using GroupAggregate = std::function<ZSet(const Tuple& key, const ZSet& group)>;

// Sum over keys of a(k, g[k]).
ZSet indexed_aggregate(const GroupAggregate& a, const IndexedZSet& g);

// a(k, s) = makeset((k..., f(s))): the usual GROUP BY aggregate.
GroupAggregate group_aggregate(AggKind f, std::size_t col = 0);

}  // namespace deltaflow
