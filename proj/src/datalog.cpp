#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <set>

#include "deltaflow/error.hpp"
#include "deltaflow/incremental.hpp"
#include "deltaflow/recursion.hpp"

namespace deltaflow {

namespace {

bool is_wildcard(const Term& t) { return t.is_var && t.var == "_"; }

std::string atom_text(const Atom& a) {
  std::string s = (a.negated ? "not " : "") + a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ", ";
    s += a.args[i].is_var ? a.args[i].var : to_string(a.args[i].value);
  }
  return s + ")";
}

}  // namespace

std::map<std::string, std::size_t> RuleProgram::derived() const {
  std::map<std::string, std::size_t> out;
  for (const Rule& r : rules) {
    const Atom& h = r.head;
    if (h.negated) throw ValidationError("negated head in rule for '" + h.relation + "'");
    if (inputs.count(h.relation)) throw ValidationError("rule head '" + h.relation + "' is an input relation");
    auto [it, fresh] = out.emplace(h.relation, h.args.size());
    if (!fresh && it->second != h.args.size()) {
      throw ValidationError("relation '" + h.relation + "' used with different arities");
    }
  }
  for (const Rule& r : rules) {
    for (const Atom& a : r.body) {
      std::size_t arity = 0;
      if (auto i = inputs.find(a.relation); i != inputs.end()) {
        arity = i->second;
      } else if (auto d = out.find(a.relation); d != out.end()) {
        arity = d->second;
      } else {
        throw ValidationError("unknown relation '" + a.relation + "' in rule for '" + r.head.relation + "'");
      }
      if (arity != a.args.size()) throw ValidationError("wrong number of arguments in " + atom_text(a));
    }
  }
  return out;
}

// ---- parsing ----

namespace {

class RuleParser {
 public:
  explicit RuleParser(const std::string& text) : s_(text) {}

  std::vector<Rule> parse() {
    std::vector<Rule> rules;
    skip();
    while (pos_ < s_.size()) {
      Rule r;
      r.head = atom();
      if (r.head.negated) fail("rule head cannot be negated");
      expect(":-");
      r.body.push_back(atom());
      while (accept(",")) r.body.push_back(atom());
      expect(".");
      rules.push_back(std::move(r));
    }
    return rules;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("rules " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '%' || s_.compare(pos_, 2, "//") == 0) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool accept(const std::string& tok) {
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    pos_ += tok.size();
    skip();
    return true;
  }

  void expect(const std::string& tok) {
    if (!accept(tok)) fail("expected '" + tok + "'");
  }

  std::string ident() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a name");
    std::string out = s_.substr(start, pos_ - start);
    skip();
    return out;
  }

  Atom atom() {
    Atom a;
    const std::size_t save = pos_;
    std::string name = ident();
    if (name == "not" && pos_ < s_.size() && s_[pos_] != '(') {
      a.negated = true;
      name = ident();
    } else if (name == "not") {
      pos_ = save;
      name = ident();
    }
    a.relation = name;
    expect("(");
    if (!accept(")")) {
      a.args.push_back(term());
      while (accept(",")) a.args.push_back(term());
      expect(")");
    }
    return a;
  }

  Term term() {
    if (pos_ >= s_.size()) fail("expected a term");
    const char ch = s_[pos_];
    if (ch == '"') {
      std::string v;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') v += s_[pos_++];
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      skip();
      return Term::constant(Scalar(v));
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-') {
      const std::size_t start = pos_;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string digits = s_.substr(start, pos_ - start);
      if (digits == "-") fail("expected a number");
      skip();
      return Term::constant(Scalar(std::int64_t{std::stoll(digits)}));
    }
    if (!(std::islower(static_cast<unsigned char>(ch)) || ch == '_')) fail("expected a variable or constant");
    return Term::variable(ident());
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Rule> parse_rules(const std::string& text) { return RuleParser(text).parse(); }

// ---- stratification ----

namespace {

struct Dep {
  std::string to;
  bool negative;
};

std::map<std::string, std::vector<Dep>> dependencies(const RuleProgram& p,
                                                     const std::map<std::string, std::size_t>& derived) {
  std::map<std::string, std::vector<Dep>> deps;
  for (const auto& [name, arity] : derived) deps[name];
  for (const Rule& r : p.rules) {
    for (const Atom& a : r.body) {
      if (derived.count(a.relation)) deps[r.head.relation].push_back(Dep{a.relation, a.negated});
    }
  }
  return deps;
}

// Strongly connected components, each listed after everything it depends on.
std::vector<std::vector<std::string>> components(const std::map<std::string, std::vector<Dep>>& deps) {
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const Dep& d : deps.at(v)) {
      if (!index.count(d.to)) {
        visit(d.to);
        low[v] = std::min(low[v], low[d.to]);
      } else if (on_stack.count(d.to)) {
        low[v] = std::min(low[v], index[d.to]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (const auto& [v, d] : deps) {
    if (!index.count(v)) visit(v);
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> stratify(const RuleProgram& p) {
  const auto derived = p.derived();
  const auto deps = dependencies(p, derived);
  const auto comps = components(deps);
  std::map<std::string, int> comp_of;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (const auto& r : comps[i]) comp_of[r] = static_cast<int>(i);
  }
  std::map<std::string, int> level;
  int top = 0;
  for (const auto& comp : comps) {
    int l = 0;
    for (const auto& r : comp) {
      for (const Dep& d : deps.at(r)) {
        if (comp_of[d.to] == comp_of[r]) {
          if (d.negative) {
            throw ValidationError("relation '" + r + "' depends negatively on '" + d.to +
                                  "' through recursion; the program cannot be stratified");
          }
          continue;
        }
        l = std::max(l, level.at(d.to) + (d.negative ? 1 : 0));
      }
    }
    for (const auto& r : comp) level[r] = l;
    top = std::max(top, l);
  }
  std::vector<std::vector<std::string>> strata(derived.empty() ? 0 : top + 1);
  for (const auto& [r, l] : level) strata[l].push_back(r);
  return strata;
}

// ---- compilation ----

namespace {

struct Bound {
  NodeId node;
  std::size_t arity;
};

using Env = std::map<std::string, Bound>;

// Local conditions of one atom: constants and repeated variables.
NodeId restrict_atom(Circuit& c, const Atom& a, NodeId in) {
  std::optional<Expr> cond;
  auto add = [&](Expr e) { cond = cond ? both(*cond, e) : e; };
  std::map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const Term& t = a.args[i];
    if (!t.is_var) {
      add(eq(col(i), lit(t.value)));
    } else if (!is_wildcard(t)) {
      auto [it, fresh] = first.emplace(t.var, i);
      if (!fresh) add(eq(col(i), col(it->second)));
    }
  }
  return cond ? c.add_lifted(filter_op(*cond), {in}) : in;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

// Left-deep join of the positive atoms in body order, then antijoins for
// the negated ones, then the head projection.
NodeId compile_rule(Circuit& c, const Env& env, const Rule& r) {
  std::optional<NodeId> cur;
  std::size_t width = 0;
  std::map<std::string, std::size_t> vars;
  for (const Atom& a : r.body) {
    if (a.negated) continue;
    const Bound& b = env.at(a.relation);
    const NodeId in = restrict_atom(c, a, b.node);
    if (!cur) {
      cur = in;
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (a.args[i].is_var && !is_wildcard(a.args[i])) vars.emplace(a.args[i].var, i);
      }
      width = b.arity;
      continue;
    }
    ExprList lk, rk;
    std::map<std::string, std::size_t> fresh;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const Term& t = a.args[i];
      if (!t.is_var || is_wildcard(t)) continue;
      if (auto it = vars.find(t.var); it != vars.end()) {
        lk.push_back(col(it->second));
        rk.push_back(col(i));
      } else {
        fresh.emplace(t.var, width + i);
      }
    }
    cur = c.add_lifted(join_op(lk, rk), {*cur, in});
    for (const auto& [v, i] : fresh) vars.emplace(v, i);
    width += b.arity;
  }
  if (!cur) throw ValidationError("rule for '" + r.head.relation + "' has no positive body atom");

  for (const Atom& a : r.body) {
    if (!a.negated) continue;
    const Bound& b = env.at(a.relation);
    std::vector<std::size_t> key_cols;
    ExprList lk;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const Term& t = a.args[i];
      if (!t.is_var || is_wildcard(t)) continue;
      auto it = vars.find(t.var);
      if (it == vars.end()) {
        throw ValidationError("variable '" + t.var + "' in " + atom_text(a) + " is not bound by a positive atom");
      }
      if (!seen.insert(t.var).second) continue;
      key_cols.push_back(i);
      lk.push_back(col(it->second));
    }
    const NodeId negated = restrict_atom(c, a, b.node);
    const NodeId keys = c.add_lifted(distinct_op(), {c.add_lifted(project_op(key_cols), {negated})});
    const NodeId matched = c.add_lifted(join_op(lk, columns(iota(key_cols.size()))), {*cur, keys});
    cur = c.add_minus(*cur, c.add_lifted(project_op(iota(width)), {matched}));
  }

  ExprList head;
  for (const Term& t : r.head.args) {
    if (!t.is_var) {
      head.push_back(lit(t.value));
      continue;
    }
    auto it = vars.find(t.var);
    if (is_wildcard(t) || it == vars.end()) {
      throw ValidationError("head variable '" + t.var + "' of " + atom_text(r.head) +
                            " is not bound by a positive body atom");
    }
    head.push_back(col(it->second));
  }
  return c.add_lifted(map_op(head), {*cur});
}

NodeId sum(Circuit& c, const std::vector<NodeId>& parts) {
  NodeId out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = c.add_plus(out, parts[i]);
  return out;
}

const char* const kRecursive = "$fix";

}  // namespace

std::map<std::string, NodeId> add_program(Circuit& c, const RuleProgram& p,
                                          const std::map<std::string, NodeId>& inputs, std::size_t cap) {
  const auto derived = p.derived();
  (void)stratify(p);
  const auto deps = dependencies(p, derived);

  Env env;
  for (const auto& [name, arity] : p.inputs) {
    auto it = inputs.find(name);
    if (it == inputs.end()) throw ValidationError("no node bound to input relation '" + name + "'");
    env[name] = Bound{it->second, arity};
  }

  for (const auto& comp : components(deps)) {
    const std::set<std::string> members(comp.begin(), comp.end());
    std::vector<const Rule*> rules;
    for (const Rule& r : p.rules) {
      if (members.count(r.head.relation)) rules.push_back(&r);
    }
    bool recursive = comp.size() > 1;
    for (const Dep& d : deps.at(comp.front())) recursive = recursive || d.to == comp.front();

    if (!recursive) {
      std::vector<NodeId> parts;
      for (const Rule* r : rules) parts.push_back(compile_rule(c, env, *r));
      env[comp.front()] = Bound{c.add_lifted(distinct_op(), {sum(c, parts)}), derived.at(comp.front())};
      continue;
    }

    // Mutually recursive relations travel in one relation of tuples
    // (tag, columns..., padding).
    const bool tagged = comp.size() > 1;
    std::size_t width = 0;
    for (const auto& r : comp) width = std::max(width, derived.at(r));
    const std::size_t fix_arity = tagged ? width + 1 : width;
    std::map<std::string, std::int64_t> tag;
    for (std::size_t i = 0; i < comp.size(); ++i) tag[comp[i]] = static_cast<std::int64_t>(i);

    auto view = [&](Circuit& k, NodeId fix, const std::string& rel) {
      if (!tagged) return fix;
      std::vector<std::size_t> cols;
      for (std::size_t i = 0; i < derived.at(rel); ++i) cols.push_back(i + 1);
      const NodeId own = k.add_lifted(filter_op(eq(col(0), lit(tag.at(rel)))), {fix});
      return k.add_lifted(project_op(cols), {own});
    };

    RecursiveBlock block;
    block.cap = cap;
    Circuit& body = block.body;
    block.recursive = kRecursive;
    Env inner;
    std::map<std::string, NodeId> bindings;
    const NodeId fix = body.add_source(kRecursive, ValueKind::ZSet);
    for (const auto& r : comp) inner[r] = Bound{view(body, fix, r), derived.at(r)};
    for (const Rule* r : rules) {
      for (const Atom& a : r->body) {
        if (inner.count(a.relation)) continue;
        inner[a.relation] = Bound{body.add_source(a.relation, ValueKind::ZSet), env.at(a.relation).arity};
        bindings[a.relation] = env.at(a.relation).node;
      }
    }
    std::vector<NodeId> parts;
    for (const Rule* r : rules) {
      NodeId out = compile_rule(body, inner, *r);
      if (tagged) {
        ExprList row{lit(tag.at(r->head.relation))};
        for (std::size_t i = 0; i < fix_arity - 1; ++i) {
          row.push_back(i < derived.at(r->head.relation) ? col(i) : lit(0));
        }
        out = body.add_lifted(map_op(row), {out});
      }
      parts.push_back(out);
    }
    body.add_sink(sum(body, parts), block.output);

    const NodeId result = add_fixpoint(c, block, bindings);
    for (const auto& r : comp) env[r] = Bound{view(c, result, r), derived.at(r)};
  }

  std::map<std::string, NodeId> out;
  for (const auto& [name, arity] : derived) out[name] = env.at(name).node;
  return out;
}

namespace {

Circuit naive_program(const RuleProgram& p, std::size_t cap) {
  Circuit c(CircuitKind::Scalar);
  std::map<std::string, NodeId> inputs;
  for (const auto& [name, arity] : p.inputs) inputs[name] = c.add_source(name, ValueKind::ZSet);
  for (const auto& [name, node] : add_program(c, p, inputs, cap)) c.add_sink(node, name);
  c.validate();
  return c;
}

}  // namespace

Circuit build_program(const RuleProgram& p, RecursionMode mode, std::size_t cap) {
  Circuit naive = naive_program(p, cap);
  return mode == RecursionMode::Naive ? naive : optimize(naive);
}

Circuit build_incremental_program(const RuleProgram& p, std::size_t cap) {
  return optimize(incrementalize_naive(lift_circuit(naive_program(p, cap))));
}

RuleProgram transitive_closure_program(const std::string& edges, const std::string& out) {
  RuleProgram p;
  p.inputs[edges] = 2;
  auto v = [](const char* n) { return Term::variable(n); };
  auto atom = [](const std::string& rel, std::vector<Term> args) { return Atom{rel, std::move(args), false}; };
  p.rules.push_back(Rule{atom(out, {v("x"), v("x")}), {atom(edges, {v("x"), v("_")})}});
  p.rules.push_back(Rule{atom(out, {v("x"), v("x")}), {atom(edges, {v("_"), v("x")})}});
  p.rules.push_back(Rule{atom(out, {v("x"), v("y")}), {atom(edges, {v("x"), v("y")})}});
  p.rules.push_back(Rule{atom(out, {v("x"), v("y")}), {atom(edges, {v("x"), v("z")}), atom(out, {v("z"), v("y")})}});
  return p;
}

}  // namespace deltaflow
