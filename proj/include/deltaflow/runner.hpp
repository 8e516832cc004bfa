#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deltaflow/spec.hpp"
#include "deltaflow/trace_io.hpp"

namespace deltaflow {

enum class RunMode { Incremental, Reference, Compare };

RunMode parse_mode(const std::string& s);

struct TickMetrics {
  std::int64_t tx = 0;
  std::uint64_t tuples = 0;
  std::uint64_t inner_iterations = 0;
  double seconds = 0;
};

struct Mismatch {
  std::int64_t tx = 0;
  std::string relation;
  ZSet expected;
  ZSet actual;
};

struct RunReport {
  // Output changes per input transaction (same tx numbers).
  ChangeTrace outputs;
  std::vector<TickMetrics> metrics;
  // Compare mode: reference side metrics and the verdict.
  std::vector<TickMetrics> reference_metrics;
  bool compared = false;
  std::optional<Mismatch> mismatch;
};

// Incremental: the incremental circuit on the changes. Reference: the query
// on every snapshot, differenced. Compare: both, checked tick by tick.
RunReport run(const QuerySpec& spec, const ChangeTrace& trace, RunMode mode);

// First transaction and relation (in name order) where the two output
// traces differ; traces of different lengths differ at the first missing tx.
std::optional<Mismatch> first_mismatch(const ChangeTrace& expected, const ChangeTrace& actual);

std::string describe(const Mismatch& m);
std::string format_metrics(const RunReport& r);

struct BenchOptions {
  std::size_t base_size = 1000;
  std::size_t delta_size = 1;
  // Values are drawn from [0, domain); 0 means base_size.
  std::int64_t domain = 0;
  std::uint64_t seed = 1;
};

struct BenchReport {
  double reference_seconds = 0;
  double incremental_seconds = 0;
  std::uint64_t reference_tuples = 0;
  std::uint64_t incremental_tuples = 0;
  std::uint64_t reference_iterations = 0;
  std::uint64_t incremental_iterations = 0;
  double ratio() const { return incremental_seconds > 0 ? reference_seconds / incremental_seconds : 0; }
};

// Random base contents for every relation, then one transaction of
// delta_size fresh inserts. Times recomputing the query on the final
// snapshot against one incremental step for the delta (the base is loaded
// into the incremental circuit first, untimed). Outputs are checked equal.
BenchReport bench(const QuerySpec& spec, const BenchOptions& opt);

std::string format_bench(const BenchReport& r);

}  // namespace deltaflow
