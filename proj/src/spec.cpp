#include "deltaflow/spec.hpp"

#include <set>

#include "deltaflow/incremental.hpp"
#include "deltaflow/trace_io.hpp"
#include "json_util.hpp"

namespace deltaflow {

using detail::json;

namespace {

ScalarKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "int") return ScalarKind::Int;
  if (s == "real") return ScalarKind::Real;
  if (s == "string") return ScalarKind::String;
  if (s == "rational") return ScalarKind::Rational;
  if (s == "any") return ScalarKind::Any;
  throw ValidationError(where + ": unknown column type '" + s + "'");
}

Schema parse_schema(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected a list of columns");
  std::vector<Column> cols;
  for (const json& c : j) {
    if (c.is_string()) {
      cols.push_back(Column{c.get<std::string>(), ScalarKind::Any});
    } else if (c.is_object() && c.contains("name") && c["name"].is_string()) {
      Column col{c["name"].get<std::string>(), ScalarKind::Any};
      if (c.contains("type")) {
        if (!c["type"].is_string()) throw ValidationError(where + ": column type must be a string");
        col.kind = parse_kind(c["type"].get<std::string>(), where);
      }
      cols.push_back(col);
    } else {
      throw ValidationError(where + ": a column is a name or {\"name\", \"type\"}");
    }
  }
  try {
    return Schema(std::move(cols));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

std::vector<std::string> names(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected a list of column names");
  std::vector<std::string> out;
  for (const json& n : j) {
    if (!n.is_string()) throw ValidationError(where + ": column names must be strings");
    out.push_back(n.get<std::string>());
  }
  return out;
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
  return j[key];
}

std::string str_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_string()) throw ValidationError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

Expr parse_expr(const json& j, const Schema& s, const std::string& where) {
  if (j.is_number() || j.is_string()) return lit(detail::scalar_from_json(j, where));
  if (!j.is_object()) throw ValidationError(where + ": malformed expression " + j.dump());
  if (j.contains("col")) {
    const json& c = j["col"];
    if (c.is_string()) {
      try {
        return col(s.index(c.get<std::string>()));
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
    if (c.is_number_unsigned() || (c.is_number_integer() && c.get<std::int64_t>() >= 0)) {
      const auto i = c.get<std::size_t>();
      if (i >= s.arity()) throw ValidationError(where + ": column " + std::to_string(i) + " out of range");
      return col(i);
    }
    throw ValidationError(where + ": \"col\" must be a name or index");
  }
  if (j.contains("lit")) return lit(detail::scalar_from_json(j["lit"], where));
  const std::string sym = str_field(j, "op", where);
  const Expr::Op op = parse_op(sym);
  const json& args = field(j, "args", where);
  if (!args.is_array()) throw ValidationError(where + ": \"args\" must be a list");
  const std::size_t want = is_unary(op) ? 1 : 2;
  if (args.size() != want) {
    throw ValidationError(where + ": operator '" + sym + "' takes " + std::to_string(want) + " arguments");
  }
  if (want == 1) return Expr::unary(op, parse_expr(args[0], s, where));
  return Expr::binary(op, parse_expr(args[0], s, where), parse_expr(args[1], s, where));
}

Term parse_term(const json& j, const std::string& where) {
  if (j.is_string()) return Term::variable(j.get<std::string>());
  if (j.is_object() && j.contains("lit")) return Term::constant(detail::scalar_from_json(j["lit"], where));
  if (j.is_number()) return Term::constant(detail::scalar_from_json(j, where));
  throw ValidationError(where + ": a rule argument is a variable name, a number or {\"lit\": value}");
}

Atom parse_atom(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": an atom is {\"rel\", \"args\"}");
  Atom a;
  a.relation = str_field(j, "rel", where);
  const json& args = field(j, "args", where);
  if (!args.is_array()) throw ValidationError(where + ": \"args\" must be a list");
  for (const json& t : args) a.args.push_back(parse_term(t, where));
  if (j.contains("not")) {
    if (!j["not"].is_boolean()) throw ValidationError(where + ": \"not\" must be true or false");
    a.negated = j["not"].get<bool>();
  }
  return a;
}

std::vector<Rule> parse_block_rules(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": \"rules\" must be a list");
  std::vector<Rule> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (j[i].is_string()) {
      try {
        for (Rule& r : parse_rules(j[i].get<std::string>())) out.push_back(std::move(r));
      } catch (const ValidationError& e) {
        throw ValidationError(w + ": " + e.what());
      }
      continue;
    }
    Rule r;
    r.head = parse_atom(field(j[i], "head", w), w);
    const json& body = field(j[i], "body", w);
    if (!body.is_array()) throw ValidationError(w + ": \"body\" must be a list");
    for (const json& a : body) r.body.push_back(parse_atom(a, w));
    out.push_back(std::move(r));
  }
  return out;
}

// Compiles views and rule blocks on demand, so they may refer to each
// other in any order.
class Compiler {
 public:
  Compiler(const json& doc, std::size_t cap) : doc_(doc), cap_(cap) {}

  QuerySpec run() {
    if (!doc_.is_object()) throw ValidationError("spec: the document must be a JSON object");
    for (const auto& [key, v] : doc_.items()) {
      if (key != "relations" && key != "views" && key != "recursive" && key != "outputs") {
        throw ValidationError("spec: unknown section \"" + key + "\"");
      }
    }
    const json& rels = field(doc_, "relations", "spec");
    if (!rels.is_object()) throw ValidationError("spec: \"relations\" must be an object");
    for (const auto& [name, cols] : rels.items()) {
      if (name == kTimeSource) throw ValidationError("spec: relation name '" + name + "' is reserved");
      const Schema s = parse_schema(cols, "relations." + name);
      spec_.relations[name] = s;
      done_[name] = Rel{spec_.query.add_source(name, ValueKind::ZSet), s};
    }
    if (doc_.contains("views")) {
      if (!doc_["views"].is_object()) throw ValidationError("spec: \"views\" must be an object");
      for (const auto& [name, v] : doc_["views"].items()) {
        if (spec_.relations.count(name)) throw ValidationError("views." + name + ": name already used by a relation");
        views_[name] = &v;
      }
    }
    if (doc_.contains("recursive")) {
      const json& blocks = doc_["recursive"];
      if (!blocks.is_array()) throw ValidationError("spec: \"recursive\" must be a list");
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string w = "recursive[" + std::to_string(b) + "]";
        if (!blocks[b].is_object()) throw ValidationError(w + ": a block is {\"rules\": [...]}");
        RuleProgram p;
        p.rules = parse_block_rules(field(blocks[b], "rules", w), w + ".rules");
        programs_.push_back(std::move(p));
        for (const Rule& r : programs_.back().rules) {
          const std::string& head = r.head.relation;
          if (spec_.relations.count(head) || views_.count(head)) {
            throw ValidationError(w + ": rule head '" + head + "' is already a relation or view");
          }
          auto [it, fresh] = block_of_.emplace(head, b);
          if (!fresh && it->second != b) throw ValidationError(w + ": '" + head + "' is defined in two blocks");
        }
      }
    }

    std::vector<std::string> outs;
    if (doc_.contains("outputs")) {
      outs = names(doc_["outputs"], "outputs");
    } else {
      for (const auto& [name, v] : views_) outs.push_back(name);
      for (const auto& [name, b] : block_of_) outs.push_back(name);
    }
    if (outs.empty()) throw ValidationError("spec: no views or rules to compute");
    for (const auto& name : outs) {
      const Rel r = resolve(name, "outputs");
      if (spec_.relations.count(name)) throw ValidationError("outputs: '" + name + "' is an input relation");
      spec_.query.add_sink(r.node, name);
      spec_.outputs[name] = r.schema.arity();
    }
    spec_.query.validate();
    return std::move(spec_);
  }

 private:
  Rel resolve(const std::string& name, const std::string& where) {
    if (auto it = done_.find(name); it != done_.end()) return it->second;
    if (!active_.insert(name).second) throw ValidationError(where + ": '" + name + "' depends on itself");
    Rel out;
    if (auto v = views_.find(name); v != views_.end()) {
      out = view(*v->second, "views." + name);
    } else if (auto b = block_of_.find(name); b != block_of_.end()) {
      block(b->second);
      out = done_.at(name);
    } else {
      throw ValidationError(where + ": unknown relation or view '" + name + "'");
    }
    active_.erase(name);
    return done_[name] = out;
  }

  void block(std::size_t b) {
    const std::string w = "recursive[" + std::to_string(b) + "]";
    RuleProgram& p = programs_[b];
    std::set<std::string> heads;
    for (const Rule& r : p.rules) heads.insert(r.head.relation);
    std::map<std::string, NodeId> inputs;
    for (const Rule& r : p.rules) {
      for (const Atom& a : r.body) {
        if (heads.count(a.relation) || p.inputs.count(a.relation)) continue;
        const Rel in = resolve(a.relation, w);
        p.inputs[a.relation] = in.schema.arity();
        inputs[a.relation] = in.node;
      }
    }
    std::map<std::string, NodeId> derived;
    try {
      derived = add_program(spec_.query, p, inputs, cap_);
    } catch (const ValidationError& e) {
      throw ValidationError(w + ": " + e.what());
    }
    const auto arity = p.derived();
    for (const auto& [name, node] : derived) {
      std::vector<std::string> cols;
      for (std::size_t i = 0; i < arity.at(name); ++i) cols.push_back("c" + std::to_string(i));
      done_[name] = Rel{node, Schema::of(cols)};
    }
  }

  std::vector<Rel> args(const json& j, const std::string& where, std::size_t n) {
    const json& a = field(j, "args", where);
    if (!a.is_array() || a.size() != n) {
      throw ValidationError(where + ": expected " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
    }
    std::vector<Rel> out;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = where + ".args[" + std::to_string(i) + "]";
      out.push_back(a[i].is_string() ? resolve(a[i].get<std::string>(), w) : view(a[i], w));
    }
    return out;
  }

  NodeId time_source() {
    if (time_ < 0) {
      time_ = spec_.query.add_source(kTimeSource, ValueKind::Any, true);
      spec_.uses_time = true;
    }
    return time_;
  }

  Rel view(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": a view is {\"op\": ..., \"args\": [...]}");
    Circuit& c = spec_.query;
    const std::string op = str_field(j, "op", where);
    try {
      if (op == "union" || op == "union_all" || op == "difference" || op == "intersect") {
        const auto in = args(j, where, 2);
        if (op == "union") return build_union(c, in[0], in[1]);
        if (op == "union_all") return build_union_all(c, in[0], in[1]);
        if (op == "difference") return build_difference(c, in[0], in[1]);
        return build_intersect(c, in[0], in[1]);
      }
      if (op == "product") {
        const auto in = args(j, where, 2);
        return build_cartesian(c, in[0], in[1]);
      }
      if (op == "join" || op == "antijoin") {
        const auto in = args(j, where, 2);
        const auto l = names(field(j, "left", where), where + ".left");
        const auto r = names(field(j, "right", where), where + ".right");
        return op == "join" ? build_equijoin(c, in[0], in[1], l, r) : build_antijoin(c, in[0], in[1], l, r);
      }
      const Rel in = args(j, where, 1)[0];
      if (op == "distinct") return build_distinct(c, in);
      if (op == "project") return build_projection(c, in, names(field(j, "columns", where), where + ".columns"));
      if (op == "filter") return build_filter(c, in, parse_expr(field(j, "predicate", where), in.schema, where));
      if (op == "map") {
        const json& outs = field(j, "outputs", where);
        if (!outs.is_array() || outs.empty()) throw ValidationError(where + ": \"outputs\" must be a non-empty list");
        ExprList exprs;
        std::vector<std::string> cols;
        for (const json& o : outs) {
          cols.push_back(str_field(o, "name", where + ".outputs"));
          exprs.push_back(parse_expr(field(o, "expr", where + ".outputs"), in.schema, where + ".outputs"));
        }
        return build_map(c, in, exprs, Schema::of(cols));
      }
      if (op == "aggregate") {
        const AggKind agg = parse_agg(str_field(j, "agg", where));
        const std::string column = j.contains("column") ? str_field(j, "column", where) : "";
        if (column.empty() && agg != AggKind::Count) throw ValidationError(where + ": missing \"column\"");
        const std::vector<std::string> group = j.contains("group") ? names(j["group"], where + ".group")
                                                                   : std::vector<std::string>{};
        const std::string as = j.contains("as") ? str_field(j, "as", where) : agg_name(agg);
        return build_aggregate(c, in, group, agg, column, as);
      }
      if (op == "window") {
        const std::size_t ts = in.schema.index(str_field(j, "ts", where));
        const Scalar width = detail::scalar_from_json(field(j, "width", where), where + ".width");
        const NodeId theta = time_source();
        const NodeId node = c.add_lifted(window_op(ts, width), {in.node, theta, c.add_delay(theta)});
        return Rel{node, in.schema};
      }
    } catch (const ValidationError& e) {
      // Errors from nested views and blocks already say where they are.
      const std::string msg = e.what();
      if (msg.rfind("views.", 0) == 0 || msg.rfind("recursive[", 0) == 0) throw;
      throw ValidationError(where + ": " + msg);
    }
    throw ValidationError(where + ": unknown operator '" + op + "'");
  }

  const json& doc_;
  std::size_t cap_;
  QuerySpec spec_;
  std::map<std::string, const json*> views_;
  std::vector<RuleProgram> programs_;
  std::map<std::string, std::size_t> block_of_;
  std::map<std::string, Rel> done_;
  std::set<std::string> active_;
  NodeId time_ = -1;
};

}  // namespace

QuerySpec parse_spec(const std::string& text, const std::string& origin, std::size_t cap) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::position(text, e.byte ? e.byte - 1 : 0);
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  try {
    return Compiler(doc, cap).run();
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

QuerySpec load_spec(const std::string& path, std::size_t cap) { return parse_spec(read_file(path), path, cap); }

Circuit incremental_circuit(const QuerySpec& spec) { return optimize(incrementalize_naive(spec.query)); }

}  // namespace deltaflow
