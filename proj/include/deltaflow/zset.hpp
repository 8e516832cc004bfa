#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "deltaflow/scalar.hpp"
#include "deltaflow/weight.hpp"

namespace deltaflow {

// Finite map from tuples to nonzero weights. Iteration follows the
// canonical tuple order, so two equal Z-sets enumerate identically.
class ZSet {
 public:
  using Map = std::map<Tuple, Weight>;
  using const_iterator = Map::const_iterator;

  ZSet() = default;
  ZSet(std::initializer_list<std::pair<Tuple, Weight>> entries);

  static ZSet singleton(Tuple x, Weight w = 1);

  Weight weight(const Tuple& x) const;
  bool contains(const Tuple& x) const { return entries_.count(x) != 0; }

  // Adds w to the weight of x; drops the entry when it reaches zero.
  void add(const Tuple& x, Weight w);
  void add(Tuple&& x, Weight w);

  ZSet& operator+=(const ZSet& other);
  ZSet& operator-=(const ZSet& other);
  ZSet operator-() const;
  friend ZSet operator+(ZSet a, const ZSet& b) { return a += b; }
  friend ZSet operator-(ZSet a, const ZSet& b) { return a -= b; }
  friend bool operator==(const ZSet& a, const ZSet& b) { return a.entries_ == b.entries_; }

  // Scales every weight by k (k == 0 yields the empty Z-set).
  ZSet scaled(Weight k) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }
  const Map& entries() const { return entries_; }

 private:
  Map entries_;
};

std::string to_string(const ZSet& z);
std::ostream& operator<<(std::ostream& os, const ZSet& z);

inline ZSet zset_add(const ZSet& a, const ZSet& b) { return a + b; }
inline ZSet zset_negate(const ZSet& a) { return -a; }

ZSet distinct(const ZSet& m);
bool is_set(const ZSet& m);
bool is_positive(const ZSet& m);
std::set<Tuple> to_set(const ZSet& m);
ZSet to_zset(const std::set<Tuple>& s);
ZSet makeset(const Tuple& x);
ZSet makeset(const Scalar& x);
// Number of entries with nonzero weight.
inline std::size_t zset_size(const ZSet& m) { return m.size(); }

// Finite map from key tuples to nonempty Z-sets (GROUP BY results).
class IndexedZSet {
 public:
  using Map = std::map<Tuple, ZSet>;
  using const_iterator = Map::const_iterator;

  IndexedZSet() = default;
  IndexedZSet(std::initializer_list<std::pair<Tuple, ZSet>> groups);

  void add(const Tuple& key, const Tuple& x, Weight w);
  void add(const Tuple& key, const ZSet& z);

  // The grouping for key, or an empty Z-set.
  const ZSet& group(const Tuple& key) const;

  IndexedZSet& operator+=(const IndexedZSet& other);
  IndexedZSet operator-() const;
  friend IndexedZSet operator+(IndexedZSet a, const IndexedZSet& b) { return a += b; }
  friend bool operator==(const IndexedZSet& a, const IndexedZSet& b) {
    return a.groups_ == b.groups_;
  }

  std::size_t size() const { return groups_.size(); }
  // Total number of (key, tuple) entries.
  std::size_t entry_count() const;
  bool empty() const { return groups_.empty(); }
  const_iterator begin() const { return groups_.begin(); }
  const_iterator end() const { return groups_.end(); }

 private:
  Map groups_;
};

std::string to_string(const IndexedZSet& z);
std::ostream& operator<<(std::ostream& os, const IndexedZSet& z);

using KeyFunc = std::function<Tuple(const Tuple&)>;

// G_p: partitions m by key; linear.
IndexedZSet group_by(const KeyFunc& p, const ZSet& m);
// Inverse of partitioning: (k, x) pairs flattened by concatenation.
ZSet flatmap(const IndexedZSet& i);

}  // namespace deltaflow
