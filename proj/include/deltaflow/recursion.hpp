#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "deltaflow/circuit.hpp"

namespace deltaflow {

inline constexpr std::size_t kRecursionCap = 100'000;

// A recursive query O = fix x. body(inputs, x). `body` is a scalar circuit
// whose sources are the inputs plus `recursive`; its sink `output` is one
// round of the rules. The body must be positive and map zero to zero.
struct RecursiveBlock {
  Circuit body{CircuitKind::Scalar};
  std::string recursive;
  std::string output = "out";
  std::size_t cap = kRecursionCap;
};

// Scalar circuits with the block's inputs as sources and the fixpoint as
// sink `output`.
// Naive: every iteration recomputes the body on all facts so far.
Circuit build_naive(const RecursiveBlock& block);
// Semi-naive: the naive circuit with its inner brackets pushed through, so
// every iteration works on the facts derived by the previous one.
Circuit build_seminaive(const RecursiveBlock& block);
// Stream circuit: consumes input changes, emits fixpoint changes, and keeps
// the per-iteration changes of earlier steps as state.
Circuit build_incremental_recursive(const RecursiveBlock& block);

// x := i; while x changes: x := Q(x). `q` is a scalar circuit with one
// source and a sink named "out"; the result has the same interface. Raises
// NonTermination after `cap` iterations.
Circuit build_while(const Circuit& q, std::size_t cap = kRecursionCap);

// Adds the fixpoint of `block` to scope 0 of `c`, reading the block inputs
// from `inputs` (root-level nodes). Returns the node carrying the fixpoint.
NodeId add_fixpoint(Circuit& c, const RecursiveBlock& block, const std::map<std::string, NodeId>& inputs);

// Datalog-style rule programs.
struct Term {
  bool is_var = true;
  std::string var;  // "_" is a fresh variable at each use
  Scalar value;

  static Term variable(std::string name) { return Term{true, std::move(name), Scalar{}}; }
  static Term constant(Scalar v) { return Term{false, {}, std::move(v)}; }
};

struct Atom {
  std::string relation;
  std::vector<Term> args;
  bool negated = false;
};

struct Rule {
  Atom head;
  std::vector<Atom> body;
};

struct RuleProgram {
  // Input relations and their arities.
  std::map<std::string, std::size_t> inputs;
  std::vector<Rule> rules;

  // Relations defined by some rule head, with their arities; throws
  // ValidationError on inconsistent arities or unknown relations.
  std::map<std::string, std::size_t> derived() const;
};

// Parses a small rule syntax, one rule per statement:
//   R(x, y) :- E(x, z), R(z, y).   O(v) :- I(v), not P(v).
// Identifiers starting with a lower-case letter or "_" are variables;
// integers and "quoted strings" are constants.
std::vector<Rule> parse_rules(const std::string& text);

// Derived relations grouped into strata, lowest first: a relation depends
// on relations in its own or lower strata, and negatively only on lower
// ones. Throws ValidationError if no such layering exists.
std::vector<std::vector<std::string>> stratify(const RuleProgram& p);

enum class RecursionMode { Naive, SemiNaive };

// Scalar circuit with one source per input relation and one sink per
// derived relation. Mutually recursive relations share one fixpoint over a
// tagged union of their tuples.
Circuit build_program(const RuleProgram& p, RecursionMode mode = RecursionMode::SemiNaive,
                      std::size_t cap = kRecursionCap);
// Adds the program to scope 0 of `c`, reading each input relation from
// the node bound to its name. Returns the node of every derived relation.
std::map<std::string, NodeId> add_program(Circuit& c, const RuleProgram& p,
                                          const std::map<std::string, NodeId>& inputs,
                                          std::size_t cap = kRecursionCap);
// Stream circuit over input changes producing derived-relation changes.
Circuit build_incremental_program(const RuleProgram& p, std::size_t cap = kRecursionCap);

// R(x,x) :- E(x,_).  R(x,x) :- E(_,x).  R(x,y) :- E(x,y).
// R(x,y) :- E(x,z), R(z,y).
RuleProgram transitive_closure_program(const std::string& edges = "E", const std::string& out = "R");

}  // namespace deltaflow
