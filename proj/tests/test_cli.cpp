#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "deltaflow/runner.hpp"
#include "oracles.hpp"
#include "queries.hpp"

using namespace deltaflow;
using namespace deltaflow::testing;

namespace {

const std::string kData = DELTAFLOW_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

ChangeTrace to_change_trace(const Trace& tr) {
  ChangeTrace out;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Transaction t;
    t.tx = static_cast<std::int64_t>(i);
    for (const auto& [rel, v] : tr[i]) t.changes[rel] = v.as_zset();
    out.push_back(std::move(t));
  }
  return out;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

int tool(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + DELTAFLOW_TOOL + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "(no error)";
}

}  // namespace

TEST(SpecTest, FilteredJoinHasSevenOperators) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  std::vector<std::string> ops;
  for (const Node& n : spec.query.nodes()) {
    if (n.kind == NodeKind::Lifted) ops.push_back(n.op->name());
  }
  std::sort(ops.begin(), ops.end());
  EXPECT_EQ(ops, (std::vector<std::string>{"distinct", "filter", "filter", "join", "project", "project", "project"}));
  EXPECT_EQ(spec.relations.size(), 2u);
  EXPECT_EQ(spec.outputs.at("v"), 2u);

  const auto n = census(incremental_circuit(spec));
  EXPECT_EQ(n.at("integrate"), 3);
  EXPECT_EQ(n.at("join"), 3);
  EXPECT_EQ(n.at("H"), 1);
}

TEST(SpecTest, OutputsDefaultToEveryViewAndRule) {
  const QuerySpec spec = load_spec(data("window.json"));
  EXPECT_EQ(spec.outputs.size(), 2u);
  EXPECT_TRUE(spec.uses_time);
  const QuerySpec closure = load_spec(data("closure.json"));
  EXPECT_EQ(closure.outputs.at("R"), 2u);
}

TEST(SpecTest, SyntaxErrorHasLineAndColumn) {
  const std::string msg = error_of([] { parse_spec("{\n  \"relations\": {\n    \"t\": [\"a\",]\n}", "q.json"); });
  EXPECT_EQ(msg.rfind("q.json:3:", 0), 0u) << msg;
}

TEST(SpecTest, SemanticErrorsNameTheirPlace) {
  EXPECT_NE(error_of([] { parse_spec(R"({"relations": {"t": ["a"]}, "views": {"v": {"op": "project", "columns": ["b"], "args": ["t"]}}})"); })
                .find("views.v"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_spec(R"({"relations": {"t": ["a"]}, "views": {"v": {"op": "distinct", "args": ["u"]}}})"); })
                .find("unknown relation or view 'u'"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_spec(R"({"relations": {"t": ["a"]}, "views": {"v": {"op": "distinct", "args": ["v"]}}})"); })
                .find("depends on itself"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_spec(R"({"relations": {"t": ["a"]}, "views": {"v": {"op": "sort", "args": ["t"]}}})"); })
                .find("unknown operator 'sort'"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_spec(R"({"relations": {"E": ["a", "b"]}, "recursive": [{"rules": ["P(x) :- E(x, y), not P(y)."]}]})"); })
                .find("recursive[0]"),
            std::string::npos);
  EXPECT_THROW(parse_spec(R"({"relations": {"t": ["a"]}, "extra": 1})"), ValidationError);
  EXPECT_THROW(parse_spec(R"({"relations": {"time": ["a"]}})"), ValidationError);
}

TEST(SpecTest, StructuredRulesMatchRuleText) {
  const QuerySpec text = load_spec(data("closure.json"));
  const QuerySpec structured = parse_spec(R"({
    "relations": {"E": ["src", "dst"]},
    "recursive": [{"rules": [
      {"head": {"rel": "R", "args": ["x", "y"]}, "body": [{"rel": "E", "args": ["x", "y"]}]},
      {"head": {"rel": "R", "args": ["x", "x"]}, "body": [{"rel": "E", "args": ["x", "y"]}]},
      {"head": {"rel": "R", "args": ["y", "y"]}, "body": [{"rel": "E", "args": ["x", "y"]}]},
      {"head": {"rel": "R", "args": ["x", "y"]}, "body": [{"rel": "R", "args": ["x", "z"]}, {"rel": "E", "args": ["z", "y"]}]}
    ]}]})");
  const ChangeTrace tr = load_trace(data("closure.trace"));
  EXPECT_EQ(format_trace(run(text, tr, RunMode::Incremental).outputs),
            format_trace(run(structured, tr, RunMode::Incremental).outputs));
}

TEST(TraceTest, EmptyFileIsEmptyTrace) {
  EXPECT_TRUE(parse_trace("").empty());
  EXPECT_TRUE(parse_trace("\n  \n").empty());
}

TEST(TraceTest, ArityMismatchNamesRelationAndLine) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  const std::string msg = error_of([&] {
    parse_trace("{\"tx\":0,\"changes\":[[\"t\",[1,2,3],1]]}\n{\"tx\":1,\"changes\":[[\"r\",[1,2],1]]}\n",
                &spec.relations, "in.ndjson");
  });
  EXPECT_NE(msg.find("in.ndjson:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'r'"), std::string::npos) << msg;
}

TEST(TraceTest, RejectsBadRecords) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  const auto* s = &spec.relations;
  EXPECT_THROW(parse_trace(R"({"tx":0,"changes":[["t",[1,2,3],0]]})", s), ValidationError);
  EXPECT_THROW(parse_trace(R"({"tx":0,"changes":[["t",[1,null,3],1]]})", s), ValidationError);
  EXPECT_THROW(parse_trace(R"({"tx":0,"changes":[["q",[1],1]]})", s), ValidationError);
  EXPECT_THROW(parse_trace(R"({"tx":0,"changes":[["t",[1,"x",3],1]]})", s), ValidationError);
  EXPECT_THROW(parse_trace(R"({"tx":0,"when":1,"changes":[]})", s), ValidationError);
  EXPECT_THROW(parse_trace(R"({"tx":0,"changes":[["t",[1,2,3]]]})", s), ValidationError);
  const std::string msg = error_of([&] { parse_trace("{\"tx\":0,\"changes\":[}", s, "in"); });
  EXPECT_EQ(msg.rfind("in:1:", 0), 0u) << msg;
}

TEST(TraceTest, RoundTripIsLossless) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> kind(0, 3), small(-20, 20), weight(-3, 3);
  for (int rep = 0; rep < 100; ++rep) {
    ChangeTrace tr;
    for (int tx = 0; tx < 5; ++tx) {
      Transaction t;
      t.tx = tx;
      if (tx % 2) t.time = std::int64_t{tx * 10};
      for (int i = 0; i < 6; ++i) {
        Tuple tuple;
        for (int c = 0; c < 2; ++c) {
          const int v = small(rng);
          switch (kind(rng)) {
            case 0: tuple.emplace_back(std::int64_t{v}); break;
            case 1: tuple.emplace_back("s" + std::to_string(v)); break;
            case 2: tuple.emplace_back(make_real(v / 4.0)); break;
            default: tuple.emplace_back(make_rational(v, 3)); break;
          }
        }
        const int w = weight(rng);
        if (w != 0) t.changes[i % 2 ? "a" : "b"].add(tuple, w);
      }
      for (auto it = t.changes.begin(); it != t.changes.end();) {
        it = it->second.empty() ? t.changes.erase(it) : std::next(it);
      }
      tr.push_back(std::move(t));
    }
    const std::string text = format_trace(tr);
    const ChangeTrace back = parse_trace(text);
    ASSERT_EQ(back.size(), tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      EXPECT_EQ(back[i].tx, tr[i].tx);
      EXPECT_EQ(back[i].time, tr[i].time);
      EXPECT_EQ(back[i].changes, tr[i].changes);
    }
    EXPECT_EQ(format_trace(back), text);
  }
}

TEST(RunTest, GoldenOutputs) {
  for (const std::string name : {"filtered_join", "closure", "window"}) {
    const QuerySpec spec = load_spec(data(name + ".json"));
    const ChangeTrace tr = load_trace(data(name + ".trace"), &spec.relations);
    const std::string want = read_file(data(name + ".expected"));
    EXPECT_EQ(format_trace(run(spec, tr, RunMode::Incremental).outputs), want) << name;
    EXPECT_EQ(format_trace(run(spec, tr, RunMode::Reference).outputs), want) << name;
    const RunReport r = run(spec, tr, RunMode::Compare);
    EXPECT_TRUE(r.compared);
    EXPECT_FALSE(r.mismatch) << name << ": " << describe(*r.mismatch);
  }
}

TEST(RunTest, EmptyTraceGivesEmptyReport) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  const RunReport r = run(spec, {}, RunMode::Compare);
  EXPECT_TRUE(r.outputs.empty());
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_FALSE(r.mismatch);
}

TEST(RunTest, CompareAgreesOnRandomTraces) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  std::mt19937_64 rng(11);
  auto gen = filtered_join_traces(rng);
  for (int rep = 0; rep < 50; ++rep) {
    const Trace tr = gen.make(5);
    const RunReport r = run(spec, to_change_trace(tr), RunMode::Compare);
    ASSERT_FALSE(r.mismatch) << describe(*r.mismatch);
    // Also against the hand-written query.
    const Trace snaps = snapshots(tr);
    Set prev;
    for (std::size_t t = 0; t < tr.size(); ++t) {
      const auto rel = [&](const char* n) { return snaps[t].count(n) ? support(snaps[t].at(n).as_zset()) : Set{}; };
      const Set now = filtered_join_oracle(rel("t"), rel("r"));
      const auto& ch = r.outputs[t].changes;
      EXPECT_EQ(ch.count("v") ? ch.at("v") : ZSet{}, from_set(now) - from_set(prev));
      prev = now;
    }
  }
}

TEST(RunTest, ClosureReferenceMatchesOracle) {
  const QuerySpec spec = load_spec(data("closure.json"));
  std::mt19937_64 rng(13);
  SetTraceGen gen(rng, {{"E", 2}}, 6);
  for (int rep = 0; rep < 30; ++rep) {
    const Trace tr = gen.make(5, 4);
    const Trace snaps = snapshots(tr);
    for (RunMode mode : {RunMode::Reference, RunMode::Incremental}) {
      const RunReport r = run(spec, to_change_trace(tr), mode);
      Set prev;
      for (std::size_t t = 0; t < tr.size(); ++t) {
        const Set now = closure_oracle(snaps[t].count("E") ? support(snaps[t].at("E").as_zset()) : Set{});
        const auto& ch = r.outputs[t].changes;
        EXPECT_EQ(ch.count("R") ? ch.at("R") : ZSet{}, from_set(now) - from_set(prev));
        prev = now;
      }
    }
  }
}

TEST(RunTest, WindowNeedsTime) {
  const QuerySpec spec = load_spec(data("window.json"));
  const ChangeTrace tr = parse_trace(R"({"tx":0,"changes":[["ev",[1,2],1]]})", &spec.relations);
  EXPECT_THROW(run(spec, tr, RunMode::Incremental), ValidationError);
}

TEST(RunTest, OutputIsDeterministic) {
  const QuerySpec spec = load_spec(data("closure.json"));
  std::mt19937_64 rng(17);
  SetTraceGen gen(rng, {{"E", 2}}, 8);
  const ChangeTrace tr = to_change_trace(gen.make(6, 5));
  const std::string a = format_trace(run(spec, tr, RunMode::Incremental).outputs);
  const std::string b = format_trace(run(load_spec(data("closure.json")), tr, RunMode::Incremental).outputs);
  EXPECT_EQ(a, b);
}

TEST(RunTest, InjectedFaultIsReported) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  const ChangeTrace tr = load_trace(data("filtered_join.trace"), &spec.relations);
  const ChangeTrace good = run(spec, tr, RunMode::Reference).outputs;
  EXPECT_FALSE(first_mismatch(good, good));

  ChangeTrace bad = good;
  bad[1].changes["v"].add(Tuple{std::int64_t{99}, std::int64_t{99}}, 1);
  const auto m = first_mismatch(good, bad);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->tx, 1);
  EXPECT_EQ(m->relation, "v");

  ChangeTrace weight = good;
  weight[2].changes["v"].add(Tuple{std::int64_t{10}, std::int64_t{20}}, 1);
  ASSERT_TRUE(first_mismatch(good, weight));
  EXPECT_EQ(first_mismatch(good, weight)->tx, 2);

  ChangeTrace short_trace = good;
  short_trace.pop_back();
  EXPECT_TRUE(first_mismatch(good, short_trace));
}

TEST(BenchTest, SmallRunAgrees) {
  const QuerySpec spec = load_spec(data("filtered_join.json"));
  const BenchReport r = bench(spec, BenchOptions{500, 3, 0, 5});
  EXPECT_GT(r.reference_tuples, r.incremental_tuples);
  const std::string text = format_bench(r);
  EXPECT_NE(text.find("\"ratio\""), std::string::npos);
}

TEST(ToolTest, ExitCodes) {
  const std::string fj = "--spec " + data("filtered_join.json") + " --trace " + data("filtered_join.trace");
  const std::string cl = "--spec " + data("closure.json") + " --trace " + data("closure.trace");
  EXPECT_EQ(tool("run " + fj), 0);
  EXPECT_EQ(tool("compare " + fj), 0);
  EXPECT_EQ(tool("run --mode reference " + cl), 0);
  EXPECT_EQ(tool("validate --spec " + data("window.json") + " --trace " + data("window.trace")), 0);
  EXPECT_EQ(tool("bench --spec " + data("filtered_join.json") + " --base-size 200"), 0);

  EXPECT_EQ(tool("run --spec " + data("filtered_join.json") + " --trace " + data("closure.trace")), 2);
  EXPECT_EQ(tool("validate --spec " + temp_file("broken.json", "{\"relations\": ")), 2);
  EXPECT_EQ(tool("run --max-iterations 1 " + cl), 4);

  const std::string big = temp_file("big.trace",
                                    "{\"tx\":0,\"changes\":[[\"E\",[1,2],9000000000000000000]]}\n"
                                    "{\"tx\":1,\"changes\":[[\"E\",[1,2],9000000000000000000]]}\n");
  EXPECT_EQ(tool("run --mode reference --spec " + data("closure.json") + " --trace " + big), 5);
}

TEST(ToolTest, EnvironmentOverridesCap) {
  const std::string cl = "--spec " + data("closure.json") + " --trace " + data("closure.trace");
  EXPECT_EQ(tool("run " + cl, "DELTAFLOW_MAX_ITER=1"), 4);
  EXPECT_EQ(tool("run --max-iterations 1 " + cl, "DELTAFLOW_MAX_ITER=1000"), 0);
  EXPECT_EQ(tool("run " + cl, "DELTAFLOW_MAX_ITER=many"), 2);
}

TEST(ToolTest, SameInputsGiveIdenticalFiles) {
  const std::string a = ::testing::TempDir() + "out_a.ndjson";
  const std::string b = ::testing::TempDir() + "out_b.ndjson";
  const std::string args = "run --seed 4 --spec " + data("window.json") + " --trace " + data("window.trace");
  ASSERT_EQ(std::system((std::string(DELTAFLOW_TOOL) + " " + args + " > " + a).c_str()), 0);
  ASSERT_EQ(std::system((std::string(DELTAFLOW_TOOL) + " " + args + " > " + b).c_str()), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(read_file(a), read_file(data("window.expected")));
}
