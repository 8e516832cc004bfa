#include <gtest/gtest.h>

#include <random>

#include "deltaflow/error.hpp"
#include "deltaflow/incremental.hpp"
#include "deltaflow/recursion.hpp"
#include "oracles.hpp"

using namespace deltaflow;
using namespace deltaflow::testing;

namespace {

Set set_of(const Value& v) { return v.is_zero() ? Set{} : support(v.as_zset()); }

Set edges(std::initializer_list<std::pair<int, int>> es) {
  Set s;
  for (auto [a, b] : es) s.insert(Tuple{std::int64_t{a}, std::int64_t{b}});
  return s;
}

Set random_graph(std::mt19937_64& rng, int nodes) {
  std::uniform_int_distribution<int> n(0, nodes * 2);
  std::uniform_int_distribution<int> v(0, nodes - 1);
  Set s;
  const int m = n(rng);
  for (int i = 0; i < m; ++i) s.insert(Tuple{std::int64_t{v(rng)}, std::int64_t{v(rng)}});
  return s;
}

Set eval(Circuit& c, const Set& e, const std::string& sink = "R") {
  c.reset();
  return set_of(c.step({{"E", from_set(e)}}).at(sink));
}

// One round of closure as a body circuit: E(x,y) plus E(x,z) joined with
// R(z,y), with the reflexive pairs of every edge endpoint.
RecursiveBlock closure_block() {
  RecursiveBlock b;
  b.recursive = "R";
  Circuit& c = b.body;
  const NodeId e = c.add_source("E");
  const NodeId r = c.add_source("R");
  const NodeId left = c.add_lifted(map_op({col(0), col(0)}), {e});
  const NodeId right = c.add_lifted(map_op({col(1), col(1)}), {e});
  const NodeId step = c.add_lifted(project_op({0, 3}), {c.add_lifted(join_op({col(1)}, {col(0)}), {e, r})});
  c.add_sink(c.add_plus(c.add_plus(left, right), c.add_plus(e, step)), "out");
  return b;
}

}  // namespace

TEST(ClosureTest, SmallGraph) {
  Circuit c = build_program(transitive_closure_program());
  EXPECT_EQ(eval(c, edges({{1, 2}, {2, 3}})),
            edges({{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {1, 3}}));
}

TEST(ClosureTest, EmptyGraphStopsAtOnce) {
  Circuit c = build_program(transitive_closure_program());
  EXPECT_TRUE(eval(c, {}).empty());
  EXPECT_LE(c.last_metrics().inner_iterations, 2u);
}

TEST(ClosureTest, ChainIterationCount) {
  Circuit c = build_program(transitive_closure_program());
  const Set chain = edges({{1, 2}, {2, 3}, {3, 4}, {4, 5}});
  EXPECT_EQ(eval(c, chain), closure_oracle(chain));
  EXPECT_LE(c.last_metrics().inner_iterations, 6u);
}

TEST(ClosureTest, CycleTerminates) {
  Circuit c = build_program(transitive_closure_program());
  const Set cyc = edges({{1, 2}, {2, 3}, {3, 1}});
  EXPECT_EQ(eval(c, cyc).size(), 9u);
}

TEST(ClosureTest, NaiveSeminaiveAndOracleAgree) {
  std::mt19937_64 rng(11);
  Circuit naive = build_program(transitive_closure_program(), RecursionMode::Naive);
  Circuit semi = build_program(transitive_closure_program(), RecursionMode::SemiNaive);
  std::uniform_int_distribution<int> size(1, 12);
  for (int g = 0; g < 100; ++g) {
    const Set e = random_graph(rng, size(rng));
    const Set want = closure_oracle(e);
    ASSERT_EQ(eval(naive, e), want) << "graph " << g;
    ASSERT_EQ(eval(semi, e), want) << "graph " << g;
  }
}

TEST(ClosureTest, SeminaiveDoesLessWork) {
  Set chain;
  for (int i = 0; i < 30; ++i) chain.insert(Tuple{std::int64_t{i}, std::int64_t{i + 1}});
  Circuit naive = build_program(transitive_closure_program(), RecursionMode::Naive);
  Circuit semi = build_program(transitive_closure_program(), RecursionMode::SemiNaive);
  ASSERT_EQ(eval(naive, chain), eval(semi, chain));
  EXPECT_LT(semi.last_metrics().tuples, naive.last_metrics().tuples);
}

TEST(ClosureTest, InnerStreamGrowsMonotonically) {
  Circuit c = build_naive(closure_block());
  NodeId facts = -1;
  for (NodeId id = 0; id < static_cast<NodeId>(c.node_count()); ++id) {
    if (c.node(id).kind == NodeKind::FeedbackStub) facts = c.node(id).feedback_from;
  }
  ASSERT_GE(facts, 0);
  std::vector<Set> seen;
  c.set_probe(facts, [&](const std::vector<std::size_t>&, const Value& v) { seen.push_back(set_of(v)); });
  std::mt19937_64 rng(5);
  for (int g = 0; g < 20; ++g) {
    seen.clear();
    c.reset();
    const Set e = random_graph(rng, 8);
    c.step({{"E", from_set(e)}});
    for (std::size_t t = 1; t < seen.size(); ++t) {
      EXPECT_TRUE(std::includes(seen[t].begin(), seen[t].end(), seen[t - 1].begin(), seen[t - 1].end()));
    }
  }
}

TEST(RecursiveBlockTest, BodyCircuitFormsAgree) {
  Circuit naive = build_naive(closure_block());
  Circuit semi = build_seminaive(closure_block());
  std::mt19937_64 rng(3);
  for (int g = 0; g < 30; ++g) {
    const Set e = random_graph(rng, 10);
    ASSERT_EQ(eval(naive, e, "out"), closure_oracle(e));
    ASSERT_EQ(eval(semi, e, "out"), closure_oracle(e));
  }
}

TEST(RecursiveBlockTest, RejectsMissingRecursiveSource) {
  RecursiveBlock b = closure_block();
  b.recursive = "nope";
  EXPECT_THROW(build_naive(b), ValidationError);
}

TEST(IncrementalRecursionTest, ClosureUnderInsertsAndDeletes) {
  std::mt19937_64 rng(17);
  Circuit inc = build_incremental_program(transitive_closure_program());
  for (int trace = 0; trace < 50; ++trace) {
    SetTraceGen gen(rng, {{"E", 2}}, 7);
    const Trace deltas = gen.make(8, 4);
    const Trace snaps = snapshots(deltas);
    inc.reset();
    Set prev;
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      const Value got = inc.step(deltas[t]).at("R");
      const Set now = closure_oracle(snaps[t].count("E") ? set_of(snaps[t].at("E")) : Set{});
      const Value want = Value(from_set(now)) - Value(from_set(prev));
      ASSERT_EQ(got, want) << "trace " << trace << " step " << t;
      prev = now;
    }
  }
}

TEST(IncrementalRecursionTest, BodyCircuitForm) {
  std::mt19937_64 rng(23);
  Circuit inc = build_incremental_recursive(closure_block());
  Circuit naive = lift_circuit(build_naive(closure_block()));
  for (int trace = 0; trace < 20; ++trace) {
    SetTraceGen gen(rng, {{"E", 2}}, 6);
    const Trace deltas = gen.make(6, 4);
    const auto want = reference_deltas(naive, deltas, "out");
    ASSERT_EQ(run_sink(inc, deltas, "out"), want) << "trace " << trace;
  }
}

TEST(IncrementalRecursionTest, OneEdgeCostsLessThanRecomputing) {
  Set chain;
  for (int i = 0; i < 40; ++i) chain.insert(Tuple{std::int64_t{i}, std::int64_t{i + 1}});
  Circuit inc = build_incremental_program(transitive_closure_program());
  inc.step({{"E", from_set(chain)}});
  const auto initial = inc.last_metrics().tuples;
  const Value d = inc.step({{"E", from_set(edges({{100, 101}}))}}).at("R");
  EXPECT_EQ(set_of(d), edges({{100, 100}, {101, 101}, {100, 101}}));
  EXPECT_LT(inc.last_metrics().tuples * 10, initial);
}

TEST(WhileTest, IdentityReturnsInput) {
  Circuit q(CircuitKind::Scalar);
  q.add_sink(q.add_source("x"), "out");
  Circuit w = build_while(q);
  const ZSet in = from_set(edges({{1, 2}, {3, 4}}));
  EXPECT_EQ(w.step({{"x", in}}).at("out"), Value(in));
  EXPECT_LE(w.last_metrics().inner_iterations, 2u);
}

namespace {

// x ∪ {v+1 | v in x, v < bound}; no bound when bound is 0
Circuit successor_body(std::int64_t bound) {
  Circuit q(CircuitKind::Scalar);
  const NodeId x = q.add_source("x");
  const NodeId below = bound > 0 ? q.add_lifted(filter_op(lt(col(0), lit(bound))), {x}) : x;
  const NodeId next = q.add_lifted(map_op({col(0) + lit(1)}), {below});
  q.add_sink(q.add_lifted(distinct_op(), {q.add_plus(x, next)}), "out");
  return q;
}

ZSet unary(std::initializer_list<int> xs) {
  ZSet z;
  for (int x : xs) z.add(Tuple{std::int64_t{x}}, 1);
  return z;
}

}  // namespace

TEST(WhileTest, ReachesFixpoint) {
  Circuit w = build_while(successor_body(5));
  EXPECT_EQ(w.step({{"x", unary({2})}}).at("out"), Value(unary({2, 3, 4, 5})));
}

TEST(WhileTest, StrictlyGrowingBodyHitsCap) {
  Circuit w = build_while(successor_body(0), 100);
  EXPECT_THROW(w.step({{"x", unary({0})}}), NonTermination);
}

TEST(WhileTest, IncrementalMatchesSnapshots) {
  std::mt19937_64 rng(29);
  Circuit w = build_while(successor_body(6));
  Circuit inc = incrementalize(w);
  for (int trace = 0; trace < 30; ++trace) {
    SetTraceGen gen(rng, {{"x", 1}}, 9);
    const Trace deltas = gen.make(10);
    ASSERT_EQ(run_sink(inc, deltas, "out"), reference_deltas(w, deltas, "out")) << "trace " << trace;
  }
}

namespace {

RuleProgram program(std::map<std::string, std::size_t> inputs, const std::string& text) {
  RuleProgram p;
  p.inputs = std::move(inputs);
  p.rules = parse_rules(text);
  return p;
}

const char* const kUnreached =
    "Reach(x) :- Start(x).\n"
    "Reach(y) :- Reach(x), E(x, y).\n"
    "Unreached(x) :- E(x, _), not Reach(x).\n";

Set reach_oracle(const Set& start, const Set& e) {
  Set r = start;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& edge : e) {
      if (r.count(Tuple{edge[0]}) && r.insert(Tuple{edge[1]}).second) grew = true;
    }
  }
  return r;
}

Set unreached_oracle(const Set& start, const Set& e) {
  const Set r = reach_oracle(start, e);
  Set out;
  for (const auto& edge : e) {
    if (!r.count(Tuple{edge[0]})) out.insert(Tuple{edge[0]});
  }
  return out;
}

}  // namespace

TEST(RuleParserTest, ParsesClosure) {
  const auto rules = parse_rules("R(x, x) :- E(x, _).\nR(x, y) :- E(x, z), R(z, y).\nS(x) :- R(x, 3), not T(\"a\").");
  ASSERT_EQ(rules.size(), 3u);
  EXPECT_EQ(rules[1].head.relation, "R");
  ASSERT_EQ(rules[1].body.size(), 2u);
  EXPECT_EQ(rules[1].body[1].args[0].var, "z");
  EXPECT_FALSE(rules[2].body[0].args[1].is_var);
  EXPECT_EQ(rules[2].body[0].args[1].value, Scalar(std::int64_t{3}));
  EXPECT_TRUE(rules[2].body[1].negated);
  EXPECT_EQ(rules[2].body[1].args[0].value, Scalar(std::string("a")));
}

TEST(RuleParserTest, ReportsPosition) {
  try {
    parse_rules("R(x) :- E(x).\nR(x) :- E(x)");
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2:13"), std::string::npos) << e.what();
  }
}

TEST(StratifyTest, ClosureIsOneStratum) {
  const auto strata = stratify(transitive_closure_program());
  ASSERT_EQ(strata.size(), 1u);
  EXPECT_EQ(strata[0], std::vector<std::string>{"R"});
}

TEST(StratifyTest, NegationSplitsStrata) {
  const auto strata = stratify(program({{"Start", 1}, {"E", 2}}, kUnreached));
  ASSERT_EQ(strata.size(), 2u);
  EXPECT_EQ(strata[0], std::vector<std::string>{"Reach"});
  EXPECT_EQ(strata[1], std::vector<std::string>{"Unreached"});
}

TEST(StratifyTest, NegativeCycleRejected) {
  const auto p = program({{"N", 1}}, "P(x) :- N(x), not Q(x).\nQ(x) :- N(x), not P(x).");
  EXPECT_THROW(stratify(p), ValidationError);
  EXPECT_THROW(build_program(p), ValidationError);
}

TEST(StratifyTest, UnboundVariablesRejected) {
  EXPECT_THROW(build_program(program({{"E", 2}}, "R(x, w) :- E(x, y).")), ValidationError);
  EXPECT_THROW(build_program(program({{"E", 2}}, "R(x) :- E(x, _), not F(y).\nF(x) :- E(x, x).")), ValidationError);
  EXPECT_THROW(build_program(program({{"E", 2}}, "R(x) :- E(x).")), ValidationError);
  EXPECT_THROW(build_program(program({{"E", 2}}, "R(x) :- G(x, x).")), ValidationError);
}

TEST(ProgramTest, TwoStrataWithNegation) {
  const auto p = program({{"Start", 1}, {"E", 2}}, kUnreached);
  Circuit naive = build_program(p, RecursionMode::Naive);
  Circuit semi = build_program(p);
  Circuit inc = build_incremental_program(p);
  std::mt19937_64 rng(41);
  for (int trace = 0; trace < 30; ++trace) {
    SetTraceGen gen(rng, {{"Start", 1}, {"E", 2}}, 6);
    const Trace deltas = gen.make(8, 3);
    const Trace snaps = snapshots(deltas);
    inc.reset();
    Set prev;
    for (std::size_t t = 0; t < deltas.size(); ++t) {
      const Set start = snaps[t].count("Start") ? set_of(snaps[t].at("Start")) : Set{};
      const Set e = snaps[t].count("E") ? set_of(snaps[t].at("E")) : Set{};
      const Set want = unreached_oracle(start, e);
      naive.reset();
      semi.reset();
      ASSERT_EQ(set_of(naive.step(snaps[t]).at("Unreached")), want);
      ASSERT_EQ(set_of(semi.step(snaps[t]).at("Reach")), reach_oracle(start, e));
      const Value got = inc.step(deltas[t]).at("Unreached");
      ASSERT_EQ(got, Value(from_set(want)) - Value(from_set(prev))) << "trace " << trace << " step " << t;
      prev = want;
    }
  }
}

namespace {

// Pairs joined by a walk of odd / even positive length.
std::pair<Set, Set> parity_oracle(const Set& e) {
  Set odd = e, even;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& edge : e) {
      for (const auto& o : Set(odd)) {
        if (o[0] == edge[1] && even.insert(Tuple{edge[0], o[1]}).second) grew = true;
      }
      for (const auto& v : Set(even)) {
        if (v[0] == edge[1] && odd.insert(Tuple{edge[0], v[1]}).second) grew = true;
      }
    }
  }
  return {odd, even};
}

}  // namespace

TEST(ProgramTest, MutualRecursion) {
  const auto p = program({{"E", 2}},
                         "Odd(x, y) :- E(x, y).\n"
                         "Odd(x, y) :- E(x, z), Even(z, y).\n"
                         "Even(x, y) :- E(x, z), Odd(z, y).\n");
  EXPECT_EQ(stratify(p).size(), 1u);
  Circuit semi = build_program(p);
  Circuit inc = build_incremental_program(p);
  std::mt19937_64 rng(43);
  for (int g = 0; g < 30; ++g) {
    const Set e = random_graph(rng, 7);
    const auto [odd, even] = parity_oracle(e);
    semi.reset();
    const auto out = semi.step({{"E", from_set(e)}});
    ASSERT_EQ(set_of(out.at("Odd")), odd);
    ASSERT_EQ(set_of(out.at("Even")), even);
  }
  for (int trace = 0; trace < 10; ++trace) {
    SetTraceGen gen(rng, {{"E", 2}}, 6);
    const Trace deltas = gen.make(6, 3);
    const Circuit lifted = lift_circuit(build_program(p, RecursionMode::Naive));
    ASSERT_EQ(run_sink(inc, deltas, "Even"), reference_deltas(lifted, deltas, "Even"));
    ASSERT_EQ(run_sink(inc, deltas, "Odd"), reference_deltas(lifted, deltas, "Odd"));
  }
}

TEST(ProgramTest, ConstantsInBodyAndHead) {
  const auto p = program({{"E", 2}}, "From1(y, 7) :- E(1, y).\nLoop(x) :- E(x, x).");
  Circuit c = build_program(p);
  const auto out = c.step({{"E", from_set(edges({{1, 2}, {1, 3}, {2, 2}, {4, 1}}))}});
  EXPECT_EQ(set_of(out.at("From1")), edges({{2, 7}, {3, 7}}));
  EXPECT_EQ(set_of(out.at("Loop")), (Set{Tuple{std::int64_t{2}}}));
}

TEST(IncrementalRecursionTest, InsertThenDeleteExamples) {
  Circuit inc = build_incremental_program(transitive_closure_program());
  inc.step({{"E", from_set(edges({{1, 2}, {2, 3}}))}});
  const ZSet added = inc.step({{"E", from_set(edges({{3, 4}}))}}).at("R").as_zset();
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 4}, {2, 4}, {3, 4}, {4, 4}}) {
    EXPECT_EQ(added.weight(Tuple{std::int64_t{a}, std::int64_t{b}}), 1) << a << "," << b;
  }
  const Value none = inc.step({}).at("R");
  EXPECT_TRUE(none.is_zero() || none.as_zset().empty());

  inc.reset();
  inc.step({{"E", from_set(edges({{1, 2}, {2, 3}}))}});
  const Value removed = inc.step({{"E", Value(-from_set(edges({{2, 3}})))}}).at("R");
  ZSet want;
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 3}, {2, 3}, {3, 3}}) {
    want.add(Tuple{std::int64_t{a}, std::int64_t{b}}, -1);
  }
  EXPECT_EQ(removed.as_zset(), want);
}

TEST(WhileTest, ClosureStepMatchesNaiveFixpoint) {
  // x ∪ (x ∘ x) over pairs, started from the edges plus their endpoints.
  Circuit q(CircuitKind::Scalar);
  const NodeId x = q.add_source("x");
  const NodeId hop = q.add_lifted(project_op({0, 3}), {q.add_lifted(join_op({col(1)}, {col(0)}), {x, x})});
  q.add_sink(q.add_lifted(distinct_op(), {q.add_plus(x, hop)}), "out");
  Circuit w = build_while(q);
  Circuit naive = build_program(transitive_closure_program(), RecursionMode::Naive);
  std::mt19937_64 rng(53);
  for (int g = 0; g < 30; ++g) {
    const Set e = random_graph(rng, 8);
    Set start = e;
    for (const auto& t : e) {
      start.insert(Tuple{t[0], t[0]});
      start.insert(Tuple{t[1], t[1]});
    }
    w.reset();
    ASSERT_EQ(set_of(w.step({{"x", from_set(start)}}).at("out")), eval(naive, e));
  }
}
