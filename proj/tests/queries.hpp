#pragma once

#include "deltaflow/relational.hpp"
#include "oracles.hpp"

namespace deltaflow::testing {

// SELECT DISTINCT t1.x, t2.y FROM (SELECT x, id FROM t WHERE a > 2) t1
// JOIN (SELECT id, y FROM r WHERE s > 5) t2 ON t1.id = t2.id
// with t(a, x, id) and r(s, id, y). Set semantics puts a distinct after
// every filter and projection.
inline Circuit filtered_join_query(Semantics sem = Semantics::Bag) {
  Circuit c(CircuitKind::Scalar);
  const Rel t = add_relation(c, "t", Schema::of({"a", "x", "id"}));
  const Rel r = add_relation(c, "r", Schema::of({"s", "id", "y"}));
  const Rel t1 = build_projection(c, build_filter(c, t, gt(col(0), lit(2)), sem), {"x", "id"}, sem);
  const Rel t2 = build_projection(c, build_filter(c, r, gt(col(0), lit(5)), sem), {"id", "y"}, sem);
  const Rel j = build_equijoin(c, t1, t2, {"id"}, {"id"});
  const Rel out = build_distinct(c, build_projection(c, j, {"x", "y"}));
  c.add_sink(out.node, "v");
  return c;
}

inline Set filtered_join_oracle(const Set& t, const Set& r) {
  Set out;
  for (const auto& a : t) {
    if (num(a[0]) <= 2) continue;
    for (const auto& b : r) {
      if (num(b[0]) > 5 && a[2] == b[1]) out.insert(Tuple{a[1], b[2]});
    }
  }
  return out;
}

inline SetTraceGen filtered_join_traces(std::mt19937_64& rng) { return SetTraceGen(rng, {{"t", 3}, {"r", 3}}, 8); }

}  // namespace deltaflow::testing
