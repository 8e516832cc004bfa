#include "deltaflow/trace_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace deltaflow {

using detail::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

Transaction parse_line(const std::string& line, const std::map<std::string, Schema>* schemas,
                       const std::string& where, std::int64_t fallback_tx) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    const std::size_t c = detail::position(line, e.byte ? e.byte - 1 : 0).second;
    throw ValidationError(where + ":" + std::to_string(c) + ": malformed JSON");
  }
  if (!j.is_object()) throw ValidationError(where + ": a transaction must be a JSON object");
  Transaction t;
  t.tx = fallback_tx;
  for (const auto& [key, v] : j.items()) {
    if (key == "tx") {
      if (!v.is_number_integer()) throw ValidationError(where + ": \"tx\" must be an integer");
      t.tx = v.get<std::int64_t>();
    } else if (key == "time") {
      t.time = detail::scalar_from_json(v, where + ": time");
      if (!is_numeric(*t.time)) throw ValidationError(where + ": time must be numeric");
    } else if (key != "changes") {
      throw ValidationError(where + ": unknown field \"" + key + "\"");
    }
  }
  if (!j.contains("changes")) return t;
  const json& changes = j["changes"];
  if (!changes.is_array()) throw ValidationError(where + ": \"changes\" must be an array");
  for (const json& ch : changes) {
    if (!ch.is_array() || ch.size() != 3 || !ch[0].is_string() || !ch[1].is_array() || !ch[2].is_number_integer()) {
      throw ValidationError(where + ": a change is [relation, [values...], weight], got " + ch.dump());
    }
    const std::string rel = ch[0].get<std::string>();
    Tuple tuple;
    for (const json& v : ch[1]) tuple.push_back(detail::scalar_from_json(v, where + ": relation '" + rel + "'"));
    const std::int64_t w = ch[2].get<std::int64_t>();
    if (w == 0) throw ValidationError(where + ": zero weight for relation '" + rel + "'");
    if (schemas) {
      auto s = schemas->find(rel);
      if (s == schemas->end()) throw ValidationError(where + ": unknown relation '" + rel + "'");
      try {
        s->second.check(tuple, rel);
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
    t.changes[rel].add(std::move(tuple), w);
  }
  for (auto it = t.changes.begin(); it != t.changes.end();) {
    it = it->second.empty() ? t.changes.erase(it) : std::next(it);
  }
  return t;
}

}  // namespace

ChangeTrace parse_trace(const std::string& text, const std::map<std::string, Schema>* schemas,
                        const std::string& origin) {
  ChangeTrace out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_line(line, schemas, origin + ":" + std::to_string(n), static_cast<std::int64_t>(out.size())));
  }
  return out;
}

ChangeTrace load_trace(const std::string& path, const std::map<std::string, Schema>* schemas) {
  return parse_trace(read_file(path), schemas, path);
}

std::string format_transaction(const Transaction& t) {
  json changes = json::array();
  for (const auto& [rel, z] : t.changes) {
    for (const auto& [tuple, w] : z) {
      json vals = json::array();
      for (const Scalar& s : tuple) vals.push_back(detail::scalar_to_json(s));
      changes.push_back(json::array({rel, vals, w}));
    }
  }
  // Fixed key order: tx, time, changes.
  std::string out = "{\"tx\":" + std::to_string(t.tx);
  if (t.time) out += ",\"time\":" + detail::scalar_to_json(*t.time).dump();
  return out + ",\"changes\":" + changes.dump() + "}";
}

std::string format_trace(const ChangeTrace& trace) {
  std::string out;
  for (const Transaction& t : trace) out += format_transaction(t) + "\n";
  return out;
}

}  // namespace deltaflow
