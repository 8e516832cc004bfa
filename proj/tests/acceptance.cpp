// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "circuit_helpers.hpp"
#include "deltaflow/aggregate.hpp"
#include "deltaflow/recursion.hpp"
#include "deltaflow/runner.hpp"
#include "oracles.hpp"
#include "queries.hpp"
#include "random_values.hpp"

using namespace deltaflow;
using namespace deltaflow::testing;

namespace {

const std::string kData = DELTAFLOW_DATA_DIR;

// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += "\n    " + f;
    if (failed_ > failures_.size()) s += "\n    ... " + std::to_string(failed_ - failures_.size()) + " more";
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

std::string show(const std::vector<Value>& vs) {
  std::string s = "<";
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + to_string(vs[i]);
  return s + ">";
}

std::string show(const Matrix& m) {
  std::ostringstream s;
  for (const auto& row : m) {
    s << "[";
    for (auto v : row) s << " " << v;
    s << " ]";
  }
  return s.str();
}

ZSet z_of(const Value& v) { return v.is_zero() ? ZSet{} : v.as_zset(); }

// ---- 1. scalar streams ----

Circuit unary(NodeKind kind) {
  Circuit c;
  const NodeId s = c.add_source("in", ValueKind::Any);
  NodeId n = s;
  if (kind == NodeKind::Delay) n = c.add_delay(s);
  if (kind == NodeKind::Integrate) n = c.add_integrate(s);
  if (kind == NodeKind::Differentiate) n = c.add_differentiate(s);
  c.add_sink(n, "out");
  return c;
}

void scalar_goldens(Check& k) {
  const auto id = ints({0, 1, 2, 3, 4});
  auto expect = [&](NodeKind kind, const std::vector<Value>& want, const char* name) {
    Circuit c = unary(kind);
    const auto got = run_stream(c, "in", id);
    k.expect(got == want, std::string(name) + " = " + show(got));
  };
  expect(NodeKind::Integrate, ints({0, 1, 3, 6, 10}), "I(id)");
  expect(NodeKind::Differentiate, ints({0, 1, 1, 1, 1}), "D(id)");
  expect(NodeKind::Delay, ints({0, 0, 1, 2, 3}), "z^-1(id)");

  Circuit twice;
  const NodeId s = twice.add_source("in", ValueKind::Int);
  twice.add_sink(twice.add_lifted(int_function("double", OpClass::Linear, [](std::int64_t x) { return 2 * x; }), {s}),
                 "out");
  const auto doubled = run_stream(twice, "in", id);
  k.expect(doubled == ints({0, 2, 4, 6, 8}), "lifted 2x = " + show(doubled));

  Circuit d0(CircuitKind::Scalar);
  const NodeId x = d0.add_source("in", ValueKind::Any);
  const int inner = d0.add_scope(0);
  const NodeId d = d0.add_delta0(inner, x);
  std::vector<Value> seen;
  d0.set_probe(d, [&](const std::vector<std::size_t>&, const Value& v) { seen.push_back(v); });
  d0.set_termination(inner, [](const std::vector<const Value*>&, std::size_t t) { return t >= 4; });
  d0.add_sink(d0.add_stream_sum(d), "out");
  d0.step({{"in", Value::integer(5)}});
  k.expect(seen == ints({5, 0, 0, 0, 0}), "delta0(5) = " + show(seen));
}

// ---- 2. nested streams ----

const Matrix kNested = {{0, 1, 2, 3}, {2, 3, 4, 5}, {4, 5, 6, 7}, {6, 7, 8, 9}};

// `outer` on whole rows and `inner` lifted to act inside each row; the
// inner operator is applied first when inner_first is set.
Circuit nested(NodeKind outer, NodeKind inner, bool inner_first = false) {
  Circuit c;
  NodeId n = c.add_source("in", ValueKind::Stream);
  auto time_op = [&](NodeKind kind, NodeId x) {
    if (kind == NodeKind::Delay) return c.add_delay(x);
    if (kind == NodeKind::Integrate) return c.add_integrate(x);
    if (kind == NodeKind::Differentiate) return c.add_differentiate(x);
    return x;
  };
  auto apply_inner = [&](NodeId x) {
    if (inner == NodeKind::Source) return x;
    const int row = c.add_scope(0, ScopeKind::Row);
    return c.add_row_pack(time_op(inner, c.add_row_unpack(row, x)));
  };
  n = inner_first ? time_op(outer, apply_inner(n)) : apply_inner(time_op(outer, n));
  c.add_sink(n, "out");
  return c;
}

void nested_goldens(Check& k) {
  const NodeKind none = NodeKind::Source, I = NodeKind::Integrate, D = NodeKind::Differentiate, z = NodeKind::Delay;
  struct Case {
    const char* name;
    Circuit c;
    Matrix want;
  };
  const std::vector<Case> cases{
      {"I(i)", nested(I, none), {{0, 1, 2, 3}, {2, 4, 6, 8}, {6, 9, 12, 15}, {12, 16, 20, 24}}},
      {"lifted I(i)", nested(none, I), {{0, 1, 3, 6}, {2, 5, 9, 14}, {4, 9, 15, 22}, {6, 13, 21, 30}}},
      {"D(i)", nested(D, none), {{0, 1, 2, 3}, {2, 2, 2, 2}, {2, 2, 2, 2}, {2, 2, 2, 2}}},
      {"lifted D(i)", nested(none, D), {{0, 1, 1, 1}, {2, 1, 1, 1}, {4, 1, 1, 1}, {6, 1, 1, 1}}},
      {"z^-1(i)", nested(z, none), {{0, 0, 0, 0}, {0, 1, 2, 3}, {2, 3, 4, 5}, {4, 5, 6, 7}}},
      {"lifted z^-1(i)", nested(none, z), {{0, 0, 1, 2}, {0, 2, 3, 4}, {0, 4, 5, 6}, {0, 6, 7, 8}}},
      {"lifted z^-1(z^-1(i))", nested(z, z), {{0, 0, 0, 0}, {0, 0, 1, 2}, {0, 2, 3, 4}, {0, 4, 5, 6}}},
      {"D(lifted D(i))", nested(D, D, true), {{0, 1, 1, 1}, {2, 0, 0, 0}, {2, 0, 0, 0}, {2, 0, 0, 0}}},
      {"lifted I(I(i))", nested(I, I), {{0, 1, 3, 6}, {2, 6, 12, 20}, {6, 15, 27, 42}, {12, 28, 48, 72}}},
  };
  for (Case c : cases) {
    const Matrix got = to_matrix(run_stream(c.c, "in", rows(kNested)), 4);
    k.expect(got == c.want, std::string(c.name) + " = " + show(got));
  }
}

// ---- 3. Z-set examples ----

void zset_goldens(Check& k) {
  const ZSet r{{tup("joe"), 1}, {tup("anne"), -1}};
  auto first_letter = [](const Tuple& x) { return tup(std::get<std::string>(x[0]).substr(0, 1)); };
  k.expect(distinct(r) == ZSet{{tup("joe"), 1}}, "distinct(R) = " + to_string(distinct(r)));
  k.expect(!is_set(r), "isset(R) should be false");
  k.expect(!is_positive(r), "ispositive(R) should be false");
  const IndexedZSet g = group_by(first_letter, r);
  const IndexedZSet want_g{{tup("j"), ZSet{{tup("joe"), 1}}}, {tup("a"), ZSet{{tup("anne"), -1}}}};
  k.expect(g == want_g, "G_p(R) differs");
  const ZSet counts = indexed_aggregate(group_aggregate(AggKind::Count), g);
  k.expect(counts == ZSet{{tup("j", 1), 1}, {tup("a", -1), 1}}, "count per group = " + to_string(counts));
  const ZSet flat = flatmap(g);
  k.expect(flat == ZSet{{tup("j", "joe"), 1}, {tup("a", "anne"), -1}}, "flatmap(G_p(R)) = " + to_string(flat));
}

// ---- 4. inversion ----

void inversion(Check& k) {
  Circuit di;
  di.add_sink(di.add_differentiate(di.add_integrate(di.add_source("in"))), "out");
  Circuit id;
  id.add_sink(id.add_integrate(id.add_differentiate(id.add_source("in"))), "out");
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto xs = zsets(random_trace(rng, 20));
    di.reset();
    id.reset();
    k.expect(run_stream(di, "in", xs) == xs, "D(I(s)) != s on stream " + std::to_string(rep));
    k.expect(run_stream(id, "in", xs) == xs, "I(D(s)) != s on stream " + std::to_string(rep));
  }
}

// ---- 5. rewrite properties ----

Trace random_inputs(std::mt19937_64& rng, int steps, int sources, int arity) {
  Trace t;
  for (int i = 0; i < steps; ++i) {
    Step s{{"a", random_zset(rng, 4, 4, arity)}};
    if (sources == 2) s["b"] = random_zset(rng, 4, 4, arity);
    t.push_back(std::move(s));
  }
  return t;
}

Circuit on_deltas(const Circuit& q) { return optimize(incrementalize_naive(lift_circuit(q))); }

void rewrite_properties(Check& k) {
  std::mt19937_64 rng(202);
  constexpr int kTraces = 200;

  // Q1 = distinct(filter(x)), Q2 = project(join(a, b)); checked composed in
  // sequence (chain) and side by side (add) from separately incrementalized
  // pieces.
  Circuit q1(CircuitKind::Scalar);
  q1.add_sink(q1.add_lifted(distinct_op(), {q1.add_lifted(filter_op(gt(col(0), lit(1))), {q1.add_source("a")})}), "out");
  Circuit q2(CircuitKind::Scalar);
  {
    const NodeId a = q2.add_source("a"), b = q2.add_source("b");
    q2.add_sink(q2.add_lifted(project_op({0}), {q2.add_lifted(join_op({col(0)}, {col(0)}), {a, b})}), "out");
  }
  const Circuit d1 = on_deltas(q1), d2 = on_deltas(q2);
  auto compose = [&](bool chain, bool inc) {
    Circuit c(inc ? CircuitKind::Stream : CircuitKind::Scalar);
    const NodeId a = c.add_source("a"), b = c.add_source("b");
    const NodeId mid = inline_circuit(c, inc ? d2 : q2, 0, {{"a", a}, {"b", b}}).at("out");
    const NodeId other = inline_circuit(c, inc ? d1 : q1, 0, {{"a", chain ? mid : a}}).at("out");
    c.add_sink(chain ? other : c.add_plus(mid, other), "out");
    return c;
  };
  const Circuit chain = compose(true, false), chain_inc = compose(true, true);
  const Circuit sum = compose(false, false), sum_inc = compose(false, true);

  // y = distinct(a + z^-1(y)) as a stream query.
  Circuit loop;
  {
    const NodeId x = loop.add_source("a");
    const NodeId stub = loop.add_feedback_stub(0);
    const NodeId y = loop.add_lifted(distinct_op(), {loop.add_plus(x, loop.add_delay(stub))});
    loop.connect_feedback(y, stub);
    loop.add_sink(y, "out");
  }
  RewriteStats stats;
  const Circuit loop_inc = optimize(incrementalize_naive(loop), &stats);
  k.expect(stats["cycle"] == 1, "feedback loop was not rewritten by the cycle rule");

  Circuit linear(CircuitKind::Scalar);
  {
    const NodeId a = linear.add_source("a"), b = linear.add_source("b");
    const NodeId f = linear.add_lifted(map_op({col(0) * lit(3)}), {linear.add_lifted(filter_op(gt(col(0), lit(1))), {a})});
    linear.add_sink(linear.add_minus(f, linear.add_lifted(project_op({0}), {b})), "out");
  }
  const Circuit linear_inc = on_deltas(linear);
  const auto n = census(linear_inc);
  k.expect(!n.count("integrate") && !n.count("differentiate"), "linear query kept integration or differentiation");

  Circuit join(CircuitKind::Scalar);
  {
    const Rel a = add_relation(join, "a", Schema::of({"k", "v"}));
    const Rel b = add_relation(join, "b", Schema::of({"k", "w"}));
    join.add_sink(build_equijoin(join, a, b, {"k"}, {"k"}).node, "out");
  }
  Circuit join_inc(CircuitKind::Stream);
  {
    const Rel a = add_relation(join_inc, "a", Schema::of({"k", "v"}));
    const Rel b = add_relation(join_inc, "b", Schema::of({"k", "w"}));
    join_inc.add_sink(build_inc_join(join_inc, a, b, {"k"}, {"k"}).node, "out");
  }

  Circuit dist(CircuitKind::Scalar);
  dist.add_sink(dist.add_lifted(distinct_op(), {dist.add_source("a")}), "out");
  Circuit dist_inc(CircuitKind::Stream);
  dist_inc.add_sink(build_inc_distinct(dist_inc, dist_inc.add_source("a")), "out");

  struct Case {
    const char* name;
    const Circuit* query;
    const Circuit* inc;
    int sources;
    int arity;
  };
  const Case cases[] = {{"chain", &chain, &chain_inc, 2, 1},  {"add", &sum, &sum_inc, 2, 1},
                        {"cycle", &loop, &loop_inc, 1, 1},    {"linear", &linear, &linear_inc, 2, 1},
                        {"bilinear", &join, &join_inc, 2, 2}, {"distinct", &dist, &dist_inc, 1, 1}};
  for (const Case& c : cases) {
    for (int rep = 0; rep < kTraces; ++rep) {
      const Trace tr = random_inputs(rng, 10, c.sources, c.arity);
      Circuit inc = *c.inc;
      k.expect(run_sink(inc, tr, "out") == reference_deltas(*c.query, tr, "out"),
               std::string(c.name) + ": incremental form differs from D.Q.I on trace " + std::to_string(rep));
    }
  }
}

// ---- 6. filtered join end to end ----

ChangeTrace as_transactions(const Trace& tr) {
  ChangeTrace out;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Transaction t;
    t.tx = static_cast<std::int64_t>(i);
    for (const auto& [rel, v] : tr[i]) t.changes[rel] = v.as_zset();
    out.push_back(std::move(t));
  }
  return out;
}

void filtered_join(Check& k) {
  const QuerySpec spec = load_spec(kData + "/filtered_join.json");
  const auto n = census(incremental_circuit(spec));
  auto count = [&](const char* key) { return n.count(key) ? n.at(key) : 0; };
  k.expect(count("integrate") == 3, "integrate nodes: " + std::to_string(count("integrate")));
  k.expect(count("join") == 3, "join nodes: " + std::to_string(count("join")));
  k.expect(count("H") == 1, "H nodes: " + std::to_string(count("H")));

  std::mt19937_64 rng(303);
  auto gen = filtered_join_traces(rng);
  for (int rep = 0; rep < 50; ++rep) {
    const Trace tr = gen.make(5);
    const RunReport r = run(spec, as_transactions(tr), RunMode::Compare);
    k.expect(!r.mismatch, "compare diverged: " + (r.mismatch ? describe(*r.mismatch) : ""));
    const Trace snaps = snapshots(tr);
    Set prev;
    for (std::size_t t = 0; t < tr.size(); ++t) {
      const auto rel = [&](const char* name) { return snaps[t].count(name) ? support(snaps[t].at(name).as_zset()) : Set{}; };
      const Set now = filtered_join_oracle(rel("t"), rel("r"));
      const auto& ch = r.outputs[t].changes;
      k.expect((ch.count("v") ? ch.at("v") : ZSet{}) == from_set(now) - from_set(prev),
               "output differs from the hand-written query at trace " + std::to_string(rep));
      prev = now;
    }
  }
}

// ---- 7. recursion ----

Set random_graph(std::mt19937_64& rng, int nodes) {
  std::uniform_int_distribution<int> m(0, nodes * 2);
  std::uniform_int_distribution<int> v(0, nodes - 1);
  Set s;
  for (int i = m(rng); i > 0; --i) s.insert(Tuple{std::int64_t{v(rng)}, std::int64_t{v(rng)}});
  return s;
}

void recursion(Check& k) {
  std::mt19937_64 rng(404);
  Circuit naive = build_program(transitive_closure_program(), RecursionMode::Naive);
  Circuit semi = build_program(transitive_closure_program(), RecursionMode::SemiNaive);
  std::uniform_int_distribution<int> size(1, 12);
  for (int g = 0; g < 100; ++g) {
    const Set e = random_graph(rng, size(rng));
    const Set want = closure_oracle(e);
    for (Circuit* c : {&naive, &semi}) {
      c->reset();
      const Set got = support(z_of(c->step({{"E", from_set(e)}}).at("R")));
      k.expect(got == want, std::string(c == &naive ? "naive" : "semi-naive") + " closure differs on graph " +
                                std::to_string(g));
    }
  }

  Circuit inc = build_incremental_program(transitive_closure_program());
  for (int rep = 0; rep < 50; ++rep) {
    SetTraceGen gen(rng, {{"E", 2}}, 8);
    const Trace deltas = gen.make(8, 4);
    const Trace snaps = snapshots(deltas);
    inc.reset();
    ZSet integrated;
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      integrated += z_of(inc.step(deltas[t]).at("R"));
      const Set want = closure_oracle(snaps[t].count("E") ? support(snaps[t].at("E").as_zset()) : Set{});
      k.expect(integrated == from_set(want),
               "incremental closure differs at trace " + std::to_string(rep) + " tick " + std::to_string(t));
    }
  }
}

// ---- 8. performance ----

void performance(Check& k) {
  const QuerySpec join = load_spec(kData + "/join.json");
  // Best of three, so one slow incremental step does not decide the outcome.
  double best = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const BenchReport r = bench(join, BenchOptions{100'000, 1, 0, seed});
    best = std::max(best, r.ratio());
  }
  k.expect(best >= 5, "join reference/incremental time ratio " + std::to_string(best) + " < 5");
  std::printf("    join, 100000-row base, 1-row delta: reference/incremental time ratio %.0f\n", best);

  // 200-node random graph, then one edge between two of its nodes.
  const QuerySpec closure = load_spec(kData + "/closure.json");
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::int64_t> node(0, 199);
  ChangeTrace tr(2);
  tr[0].tx = 0;
  tr[1].tx = 1;
  std::set<Tuple> seen;
  while (seen.size() < 200) {
    Tuple e{node(rng), node(rng)};
    if (seen.insert(e).second) tr[0].changes["E"].add(e, 1);
  }
  for (;;) {
    Tuple e{node(rng), node(rng)};
    if (seen.count(e)) continue;
    tr[1].changes["E"].add(e, 1);
    break;
  }
  const RunReport r = run(closure, tr, RunMode::Compare);
  k.expect(!r.mismatch, "closure outputs differ between modes");
  const auto inc = r.metrics[1].tuples, ref = r.reference_metrics[1].tuples;
  k.expect(inc < ref, "closure tuples: incremental " + std::to_string(inc) + " >= reference " + std::to_string(ref));
  std::printf("    closure, 200-node graph, 1-edge delta: %llu tuples incremental, %llu reference\n",
              static_cast<unsigned long long>(inc), static_cast<unsigned long long>(ref));
}

// ---- 9. window, stream join, while ----

Set iterate_to_fixpoint(Set x, const std::function<Set(const Set&)>& q) {
  for (;;) {
    Set next = q(x);
    if (next == x) return x;
    x = std::move(next);
  }
}

// x ∪ {v+1 | v in x, v < 6}
Set successor_step(const Set& x) {
  Set out = x;
  for (const auto& t : x) {
    if (num(t[0]) < 6) out.insert(Tuple{num(t[0]) + 1});
  }
  return out;
}

Circuit successor_body() {
  Circuit q(CircuitKind::Scalar);
  const NodeId x = q.add_source("x");
  const NodeId next = q.add_lifted(map_op({col(0) + lit(1)}), {q.add_lifted(filter_op(lt(col(0), lit(6))), {x})});
  q.add_sink(q.add_lifted(distinct_op(), {q.add_plus(x, next)}), "out");
  return q;
}

void streaming(Check& k) {
  std::mt19937_64 rng(606);
  constexpr std::int64_t kWidth = 5;
  std::uniform_int_distribution<int> advance(0, 4);
  for (int rep = 0; rep < 100; ++rep) {
    Circuit w(CircuitKind::Stream);
    const Rel in = add_relation(w, "in", Schema::of({"ts"}));
    const NodeId theta = w.add_source("theta", ValueKind::Int, true);
    w.add_sink(build_window(w, in, theta, WindowSpec{0, kWidth}).node, "out");
    SetTraceGen gen(rng, {{"in", 1}}, 40);
    ZSet all;
    std::int64_t bound = 0;
    for (Step s : gen.make(10, 4)) {
      bound += advance(rng);
      if (s.count("in")) all += s.at("in").as_zset();
      s["theta"] = Value::integer(bound);
      ZSet want;
      for (const auto& [x, m] : all) {
        if (num(x[0]) >= bound - kWidth) want.add(x, m);
      }
      k.expect(z_of(w.step(s).at("out")) == want, "window differs from a filter of the integrated input");
    }
  }

  for (int rep = 0; rep < 100; ++rep) {
    Circuit c(CircuitKind::Stream);
    const Rel r = add_relation(c, "s", Schema::of({"k"}));
    const Rel e = add_relation(c, "e", Schema::of({"k", "ev"}));
    c.add_sink(build_stream_join(c, r, e, {"k"}, {"k"}).node, "out");
    SetTraceGen gen(rng, {{"s", 1}, {"e", 2}}, 4);
    ZSet integrated;
    for (const Step& s : gen.make(10)) {
      if (s.count("s")) integrated += s.at("s").as_zset();
      ZSet want;
      if (s.count("e")) {
        for (const auto& [x, w] : s.at("e").as_zset()) {
          for (const auto& [y, v] : integrated) {
            if (y[0] == x[0]) want.add(Tuple{y[0], x[0], x[1]}, w * v);
          }
        }
      }
      k.expect(z_of(c.step(s).at("out")) == want, "stream join differs from joining against the integral");
    }
  }

  Circuit loop = build_while(successor_body());
  Circuit loop_inc = incrementalize(loop);
  for (int rep = 0; rep < 50; ++rep) {
    SetTraceGen gen(rng, {{"x", 1}}, 9);
    const Trace deltas = gen.make(10);
    const Trace snaps = snapshots(deltas);
    loop.reset();
    loop_inc.reset();
    Set prev;
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      const Set in = snaps[t].count("x") ? support(snaps[t].at("x").as_zset()) : Set{};
      const Set want = iterate_to_fixpoint(in, successor_step);
      k.expect(support(z_of(loop.step({{"x", from_set(in)}}).at("out"))) == want, "while loop differs from iterating Q");
      k.expect(z_of(loop_inc.step(deltas[t]).at("out")) == from_set(want) - from_set(prev),
               "incremental while loop differs from iterating Q");
      prev = want;
    }
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Check&)> run;
  double limit_seconds;  // 0: no limit
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "scalar stream goldens", scalar_goldens, 1},
      {2, "nested stream goldens", nested_goldens, 1},
      {3, "Z-set goldens", zset_goldens, 0},
      {4, "I and D are inverse on 1000 random streams", inversion, 0},
      {5, "rewrite rules match D.Q.I on 200 traces each", rewrite_properties, 30},
      {6, "filtered join: operator census and compare mode", filtered_join, 0},
      {7, "closure: naive, semi-naive, incremental and oracle agree", recursion, 60},
      {8, "performance smoke: join time ratio and closure work", performance, 0},
      {9, "window, stream join and while loop against oracles", streaming, 0},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    Check k;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(k);
    } catch (const std::exception& e) {
      k.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0) {
      k.expect(secs < c.limit_seconds, "took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_seconds));
    }
    std::printf("criterion %d %s: %s (%.2f s)%s\n", c.id, k.ok() ? "PASS" : "FAIL", c.title, secs, k.summary().c_str());
    std::fflush(stdout);
    failed += !k.ok();
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
