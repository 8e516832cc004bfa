#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltaflow/circuit.hpp"

namespace deltaflow {

// D ∘ c ∘ I: every data source is integrated and every sink differentiated
// (the brackets that optimize() pushes through). Clock sources are left
// alone: they carry a bound, not a change. c must be a stream circuit.
Circuit incrementalize_naive(const Circuit& c);

// Counts of rewrites applied, keyed by rule name.
using RewriteStats = std::map<std::string, int>;

// Pushes the integrate/differentiate brackets through the circuit, deepest
// clock first: linear and time operators act on changes directly, bilinear
// operators expand into joins against integrated state, distinct becomes
// H, feedback loops are rewritten in place, and anything else keeps an
// explicit I/D pair around it. The result is equivalent step for step.
Circuit optimize(const Circuit& c, RewriteStats* stats = nullptr);

// Removes distinct nodes that cannot change the result of a circuit over
// sets: a distinct moves past filter/join/product, and a distinct below
// filter/project/map/plus/join/product feeding another distinct is dropped.
// Sources are assumed to hold sets.
Circuit consolidate_distinct(const Circuit& c, RewriteStats* stats = nullptr);

// Full pipeline for a query written as a scalar circuit over relations:
// consolidate distincts, lift, bracket, optimize. The result consumes and
// produces per-step changes.
Circuit incrementalize(const Circuit& query, RewriteStats* stats = nullptr);

// I ∘ c ∘ D: turns an incremental circuit back into one over snapshots.
Circuit deincrementalize(const Circuit& c);

using Step = std::map<std::string, Value>;
using Trace = std::vector<Step>;

struct Divergence {
  std::size_t step = 0;
  std::string sink;
  Value expected;
  Value actual;
};

// Runs both circuits from a fresh state on the trace and reports the first
// step and sink (in name order) where their outputs differ.
std::optional<Divergence> first_divergence(Circuit expected, Circuit actual, const Trace& trace);

}  // namespace deltaflow
