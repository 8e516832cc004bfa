#include "deltaflow/zset.hpp"

#include <sstream>

namespace deltaflow {

ZSet::ZSet(std::initializer_list<std::pair<Tuple, Weight>> entries) {
  for (const auto& [x, w] : entries) add(x, w);
}

ZSet ZSet::singleton(Tuple x, Weight w) {
  ZSet z;
  z.add(std::move(x), w);
  return z;
}

Weight ZSet::weight(const Tuple& x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? 0 : it->second;
}

void ZSet::add(const Tuple& x, Weight w) {
  if (w == 0) return;
  auto [it, inserted] = entries_.try_emplace(x, w);
  if (inserted) return;
  it->second = checked_add(it->second, w);
  if (it->second == 0) entries_.erase(it);
}

void ZSet::add(Tuple&& x, Weight w) {
  if (w == 0) return;
  auto [it, inserted] = entries_.try_emplace(std::move(x), w);
  if (inserted) return;
  it->second = checked_add(it->second, w);
  if (it->second == 0) entries_.erase(it);
}

ZSet& ZSet::operator+=(const ZSet& other) {
  if (this == &other) {
    for (auto& [x, w] : entries_) w = checked_add(w, w);
    return *this;
  }
  if (entries_.empty()) {
    entries_ = other.entries_;
    return *this;
  }
  auto hint = entries_.begin();
  for (const auto& [x, w] : other.entries_) {
    hint = entries_.lower_bound(x);
    if (hint != entries_.end() && hint->first == x) {
      hint->second = checked_add(hint->second, w);
      if (hint->second == 0) hint = entries_.erase(hint);
    } else {
      hint = entries_.emplace_hint(hint, x, w);
    }
  }
  return *this;
}

ZSet& ZSet::operator-=(const ZSet& other) {
  if (this == &other) {
    entries_.clear();
    return *this;
  }
  for (const auto& [x, w] : other.entries_) add(x, checked_neg(w));
  return *this;
}

ZSet ZSet::operator-() const {
  ZSet out = *this;
  for (auto& [x, w] : out.entries_) w = checked_neg(w);
  return out;
}

ZSet ZSet::scaled(Weight k) const {
  ZSet out;
  if (k == 0) return out;
  for (const auto& [x, w] : entries_) out.entries_.emplace_hint(out.entries_.end(), x, checked_mul(w, k));
  return out;
}

std::string to_string(const ZSet& z) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, w] : z) {
    if (!first) out += ", ";
    first = false;
    out += to_string(x) + "=>" + std::to_string(w);
  }
  return out + "}";
}

std::ostream& operator<<(std::ostream& os, const ZSet& z) { return os << to_string(z); }

ZSet distinct(const ZSet& m) {
  ZSet out;
  for (const auto& [x, w] : m) {
    if (w > 0) out.add(x, 1);
  }
  return out;
}

bool is_set(const ZSet& m) {
  for (const auto& [x, w] : m) {
    if (w != 1) return false;
  }
  return true;
}

bool is_positive(const ZSet& m) {
  for (const auto& [x, w] : m) {
    if (w < 0) return false;
  }
  return true;
}

std::set<Tuple> to_set(const ZSet& m) {
  std::set<Tuple> out;
  for (const auto& [x, w] : m) {
    if (w > 0) out.insert(out.end(), x);
  }
  return out;
}

ZSet to_zset(const std::set<Tuple>& s) {
  ZSet out;
  for (const auto& x : s) out.add(x, 1);
  return out;
}

ZSet makeset(const Tuple& x) { return ZSet::singleton(x, 1); }
ZSet makeset(const Scalar& x) { return ZSet::singleton(Tuple{x}, 1); }

IndexedZSet::IndexedZSet(std::initializer_list<std::pair<Tuple, ZSet>> groups) {
  for (const auto& [k, z] : groups) add(k, z);
}

void IndexedZSet::add(const Tuple& key, const Tuple& x, Weight w) {
  if (w == 0) return;
  auto it = groups_.find(key);
  if (it == groups_.end()) {
    groups_.emplace(key, ZSet::singleton(x, w));
    return;
  }
  it->second.add(x, w);
  if (it->second.empty()) groups_.erase(it);
}

void IndexedZSet::add(const Tuple& key, const ZSet& z) {
  if (z.empty()) return;
  auto it = groups_.find(key);
  if (it == groups_.end()) {
    groups_.emplace(key, z);
    return;
  }
  it->second += z;
  if (it->second.empty()) groups_.erase(it);
}

const ZSet& IndexedZSet::group(const Tuple& key) const {
  static const ZSet kEmpty;
  auto it = groups_.find(key);
  return it == groups_.end() ? kEmpty : it->second;
}

IndexedZSet& IndexedZSet::operator+=(const IndexedZSet& other) {
  if (this == &other) {
    IndexedZSet copy = other;
    return *this += copy;
  }
  for (const auto& [k, z] : other.groups_) add(k, z);
  return *this;
}

IndexedZSet IndexedZSet::operator-() const {
  IndexedZSet out;
  for (const auto& [k, z] : groups_) out.groups_.emplace_hint(out.groups_.end(), k, -z);
  return out;
}

std::size_t IndexedZSet::entry_count() const {
  std::size_t n = 0;
  for (const auto& [k, z] : groups_) n += z.size();
  return n;
}

std::string to_string(const IndexedZSet& z) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, g] : z) {
    if (!first) out += ", ";
    first = false;
    out += to_string(k) + "=>" + to_string(g);
  }
  return out + "}";
}

std::ostream& operator<<(std::ostream& os, const IndexedZSet& z) { return os << to_string(z); }

IndexedZSet group_by(const KeyFunc& p, const ZSet& m) {
  IndexedZSet out;
  for (const auto& [x, w] : m) out.add(p(x), x, w);
  return out;
}

ZSet flatmap(const IndexedZSet& i) {
  ZSet out;
  for (const auto& [k, g] : i) {
    for (const auto& [x, w] : g) out.add(concat(k, x), w);
  }
  return out;
}

}  // namespace deltaflow
