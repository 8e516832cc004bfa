#include "deltaflow/runner.hpp"

#include <chrono>
#include <random>
#include <set>

#include "deltaflow/incremental.hpp"
#include "json_util.hpp"

namespace deltaflow {

using detail::json;

RunMode parse_mode(const std::string& s) {
  if (s == "incremental") return RunMode::Incremental;
  if (s == "reference") return RunMode::Reference;
  if (s == "compare") return RunMode::Compare;
  throw ValidationError("unknown mode '" + s + "' (expected incremental, reference or compare)");
}

namespace {

using Clock = std::chrono::steady_clock;

Value time_value(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return Value::integer(*i);
  return Value::real(to_double(s));
}

ZSet as_zset(const Value& v, const std::string& sink) {
  if (v.is_zero()) return {};
  if (v.kind() != ValueKind::ZSet) throw CircuitError("output '" + sink + "' is not a Z-set");
  return v.as_zset();
}

// Feeds transactions one by one, either as changes or as snapshots, and
// collects output changes.
class Driver {
 public:
  Driver(const QuerySpec& spec, bool incremental)
      : spec_(spec), incremental_(incremental), c_(incremental ? incremental_circuit(spec) : spec.query) {}

  Transaction step(const Transaction& in, TickMetrics& m) {
    Step inputs;
    for (const auto& [rel, z] : in.changes) {
      if (!spec_.relations.count(rel)) throw ValidationError("tx " + std::to_string(in.tx) + ": unknown relation '" + rel + "'");
      if (incremental_) {
        inputs[rel] = z;
      } else {
        snapshot_[rel] += z;
      }
    }
    if (!incremental_) {
      for (const auto& [rel, z] : snapshot_) inputs[rel] = z;
    }
    if (spec_.uses_time) {
      if (in.time) time_ = *in.time;
      if (!time_) throw ValidationError("tx " + std::to_string(in.tx) + ": the query has a window but no time is given");
      inputs[kTimeSource] = time_value(*time_);
    }
    const auto start = Clock::now();
    const auto out = c_.step(inputs);
    m.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    m.tx = in.tx;
    m.tuples = c_.last_metrics().tuples;
    m.inner_iterations = c_.last_metrics().inner_iterations;

    Transaction t;
    t.tx = in.tx;
    for (const auto& [sink, v] : out) {
      ZSet z = as_zset(v, sink);
      if (!incremental_) {
        ZSet now = z;
        z -= previous_[sink];
        previous_[sink] = std::move(now);
      }
      if (!z.empty()) t.changes[sink] = std::move(z);
    }
    return t;
  }

 private:
  const QuerySpec& spec_;
  bool incremental_;
  Circuit c_;
  std::map<std::string, ZSet> snapshot_;
  std::map<std::string, ZSet> previous_;
  std::optional<Scalar> time_;
};

json metrics_json(const std::vector<TickMetrics>& ms) {
  json out = json::array();
  for (const TickMetrics& m : ms) {
    out.push_back({{"tx", m.tx}, {"tuples", m.tuples}, {"inner_iterations", m.inner_iterations}, {"seconds", m.seconds}});
  }
  return out;
}

}  // namespace

RunReport run(const QuerySpec& spec, const ChangeTrace& trace, RunMode mode) {
  RunReport r;
  const bool inc = mode != RunMode::Reference;
  Driver main(spec, inc);
  for (const Transaction& t : trace) {
    TickMetrics m;
    r.outputs.push_back(main.step(t, m));
    r.metrics.push_back(m);
  }
  if (mode == RunMode::Compare) {
    Driver ref(spec, false);
    ChangeTrace expected;
    for (const Transaction& t : trace) {
      TickMetrics m;
      expected.push_back(ref.step(t, m));
      r.reference_metrics.push_back(m);
    }
    r.compared = true;
    r.mismatch = first_mismatch(expected, r.outputs);
  }
  return r;
}

std::optional<Mismatch> first_mismatch(const ChangeTrace& expected, const ChangeTrace& actual) {
  const std::size_t n = std::max(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= expected.size() || i >= actual.size()) {
      const Transaction& present = i < expected.size() ? expected[i] : actual[i];
      return Mismatch{present.tx, "(missing transaction)", {}, {}};
    }
    const Transaction& e = expected[i];
    const Transaction& a = actual[i];
    std::set<std::string> rels;
    for (const auto& [rel, z] : e.changes) rels.insert(rel);
    for (const auto& [rel, z] : a.changes) rels.insert(rel);
    for (const auto& rel : rels) {
      const ZSet ez = e.changes.count(rel) ? e.changes.at(rel) : ZSet{};
      const ZSet az = a.changes.count(rel) ? a.changes.at(rel) : ZSet{};
      if (!(ez == az)) return Mismatch{e.tx, rel, ez, az};
    }
    if (e.tx != a.tx) return Mismatch{e.tx, "(transaction number)", {}, {}};
  }
  return std::nullopt;
}

std::string describe(const Mismatch& m) {
  return "tx " + std::to_string(m.tx) + ", relation " + m.relation + ": expected " + to_string(m.expected) +
         ", got " + to_string(m.actual);
}

std::string format_metrics(const RunReport& r) {
  json j;
  j["ticks"] = metrics_json(r.metrics);
  if (r.compared) {
    j["reference_ticks"] = metrics_json(r.reference_metrics);
    j["verdict"] = r.mismatch ? "diverged" : "equal";
    if (r.mismatch) j["divergence"] = describe(*r.mismatch);
  }
  return j.dump(2) + "\n";
}

// ---- bench ----

namespace {

Scalar random_value(std::mt19937_64& rng, ScalarKind k, std::int64_t domain) {
  std::uniform_int_distribution<std::int64_t> v(0, domain - 1);
  const std::int64_t x = v(rng);
  switch (k) {
    case ScalarKind::String: return "s" + std::to_string(x);
    case ScalarKind::Real: return make_real(static_cast<double>(x));
    default: return x;
  }
}

Tuple random_tuple(std::mt19937_64& rng, const Schema& s, std::int64_t domain) {
  Tuple t;
  for (const Column& c : s.columns()) t.push_back(random_value(rng, c.kind, domain));
  return t;
}

}  // namespace

BenchReport bench(const QuerySpec& spec, const BenchOptions& opt) {
  if (opt.base_size == 0 && opt.delta_size == 0) throw ValidationError("bench: base and delta are both empty");
  const std::int64_t domain = opt.domain > 0 ? opt.domain : static_cast<std::int64_t>(std::max<std::size_t>(opt.base_size, 1));
  std::mt19937_64 rng(opt.seed);

  std::map<std::string, std::set<Tuple>> present;
  Transaction base, delta;
  base.tx = 0;
  delta.tx = 1;
  if (spec.uses_time) base.time = delta.time = std::int64_t{0};
  for (const auto& [rel, schema] : spec.relations) {
    auto& seen = present[rel];
    // Duplicates are skipped, so small domains give fewer rows.
    for (std::size_t i = 0; i < opt.base_size * 4 && seen.size() < opt.base_size; ++i) {
      Tuple t = random_tuple(rng, schema, domain);
      if (seen.insert(t).second) base.changes[rel].add(std::move(t), 1);
    }
  }
  std::vector<std::string> rels;
  for (const auto& [rel, s] : spec.relations) rels.push_back(rel);
  std::uniform_int_distribution<std::size_t> pick(0, rels.size() - 1);
  for (std::size_t i = 0, tries = 0; i < opt.delta_size && tries < opt.delta_size * 100 + 100; ++tries) {
    const std::string& rel = rels[pick(rng)];
    Tuple t = random_tuple(rng, spec.relations.at(rel), domain * 2);
    if (!present[rel].insert(t).second) continue;
    delta.changes[rel].add(std::move(t), 1);
    ++i;
  }

  BenchReport r;
  TickMetrics m;
  Driver ref(spec, false);
  ref.step(base, m);
  const Transaction want = ref.step(delta, m);
  r.reference_seconds = m.seconds;
  r.reference_tuples = m.tuples;
  r.reference_iterations = m.inner_iterations;

  Driver inc(spec, true);
  inc.step(base, m);
  const Transaction got = inc.step(delta, m);
  r.incremental_seconds = m.seconds;
  r.incremental_tuples = m.tuples;
  r.incremental_iterations = m.inner_iterations;

  if (auto mm = first_mismatch({want}, {got})) throw Error("bench: incremental and reference outputs differ: " + describe(*mm));
  return r;
}

std::string format_bench(const BenchReport& r) {
  json j{{"reference_seconds", r.reference_seconds},
         {"incremental_seconds", r.incremental_seconds},
         {"ratio", r.ratio()},
         {"reference_tuples", r.reference_tuples},
         {"incremental_tuples", r.incremental_tuples},
         {"reference_inner_iterations", r.reference_iterations},
         {"incremental_inner_iterations", r.incremental_iterations}};
  return j.dump(2) + "\n";
}

}  // namespace deltaflow
