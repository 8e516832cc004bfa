// deltaflow: run a query spec over a change trace.
//
//   deltaflow run --spec q.json --trace t.ndjson [--mode incremental|reference|compare]
//   deltaflow compare --spec q.json --trace t.ndjson
//   deltaflow bench --spec q.json --base-size 100000 --delta-size 1 --seed 7
//   deltaflow validate --spec q.json [--trace t.ndjson]
//
// Exit codes: 0 ok, 1 other failure, 2 invalid input, 3 divergence,
// 4 iteration cap reached, 5 overflow.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "deltaflow/error.hpp"
#include "deltaflow/runner.hpp"

using namespace deltaflow;

namespace {

constexpr int kInvalid = 2;
constexpr int kDiverged = 3;
constexpr int kCapped = 4;
constexpr int kOverflow = 5;

std::size_t iteration_cap(std::size_t flag) {
  if (const char* env = std::getenv("DELTAFLOW_MAX_ITER"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size() || v == 0) throw std::invalid_argument(env);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ValidationError(std::string("DELTAFLOW_MAX_ITER must be a positive integer, got '") + env + "'");
    }
  }
  return flag;
}

void write_metrics(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

struct Options {
  std::string spec;
  std::string trace;
  std::string mode = "incremental";
  std::size_t max_iterations = kRecursionCap;
  std::uint64_t seed = 1;
  std::string metrics_out;
  std::size_t base_size = 1000;
  std::size_t delta_size = 1;
  std::int64_t domain = 0;
};

int run_cmd(const Options& o, RunMode mode) {
  const QuerySpec spec = load_spec(o.spec, iteration_cap(o.max_iterations));
  const ChangeTrace trace = load_trace(o.trace, &spec.relations);
  const RunReport r = run(spec, trace, mode);
  std::cout << format_trace(r.outputs);
  write_metrics(o.metrics_out, format_metrics(r));
  if (!r.compared) return 0;
  if (r.mismatch) {
    std::cerr << "compare: diverged at " << describe(*r.mismatch) << "\n";
    return kDiverged;
  }
  std::cerr << "compare: equal over " << trace.size() << " transactions\n";
  return 0;
}

int bench_cmd(const Options& o) {
  const QuerySpec spec = load_spec(o.spec, iteration_cap(o.max_iterations));
  const BenchReport r = bench(spec, BenchOptions{o.base_size, o.delta_size, o.domain, o.seed});
  const std::string text = format_bench(r);
  std::cout << text;
  write_metrics(o.metrics_out, text);
  return 0;
}

int validate_cmd(const Options& o) {
  const QuerySpec spec = load_spec(o.spec, iteration_cap(o.max_iterations));
  std::size_t ops = 0;
  for (const Node& n : spec.query.nodes()) ops += n.kind == NodeKind::Lifted;
  std::cout << "spec ok: " << spec.relations.size() << " relations, " << spec.outputs.size() << " outputs, " << ops
            << " operators\n";
  if (!o.trace.empty()) {
    const ChangeTrace t = load_trace(o.trace, &spec.relations);
    std::cout << "trace ok: " << t.size() << " transactions\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental view maintenance over Z-set circuits"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd, bool trace_required) {
    cmd->add_option("--spec", o.spec, "Query spec (JSON)")->required()->check(CLI::ExistingFile);
    auto* t = cmd->add_option("--trace", o.trace, "Change trace (one JSON transaction per line)");
    if (trace_required) t->required();
    t->check(CLI::ExistingFile);
    cmd->add_option("--max-iterations", o.max_iterations, "Fixpoint iteration cap (DELTAFLOW_MAX_ITER overrides)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--metrics-out", o.metrics_out, "Write metrics JSON here");
  };

  auto* run = app.add_subcommand("run", "Run a trace and print output changes");
  common(run, true);
  run->add_option("--mode", o.mode, "incremental, reference or compare")
      ->check(CLI::IsMember({"incremental", "reference", "compare"}));
  auto* compare = app.add_subcommand("compare", "Run incremental and reference side by side");
  common(compare, true);
  auto* bench = app.add_subcommand("bench", "Time one small delta against recomputation");
  common(bench, false);
  bench->add_option("--base-size", o.base_size, "Rows per relation in the base");
  bench->add_option("--delta-size", o.delta_size, "Rows in the delta");
  bench->add_option("--domain", o.domain, "Values are drawn from [0, domain) (default: base size)");
  auto* validate = app.add_subcommand("validate", "Check a spec (and optionally a trace)");
  common(validate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_cmd(o, parse_mode(o.mode));
    if (compare->parsed()) return run_cmd(o, RunMode::Compare);
    if (bench->parsed()) return bench_cmd(o);
    return validate_cmd(o);
  } catch (const NonTermination& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapped;
  } catch (const OverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOverflow;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const TypeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
