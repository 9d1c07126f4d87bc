// Flat memory model: addresses, values, heaps and address sets.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace gai {

using Addr = std::uint64_t;
using Size = std::uint64_t;
using Val = boost::multiprecision::cpp_int;

/// Largest address any heap may hold. Everything above is never accessible.
inline constexpr Addr kHeapMax = Addr{1} << 32;

/// Converts a value to an address if it is a non-negative integer within
/// kHeapMax.
inline std::optional<Addr> to_addr(const Val &v) {
  if (v < 0 || v > kHeapMax)
    return std::nullopt;
  return static_cast<Addr>(v);
}

/// Converts a value to a size; negative values are not sizes.
inline std::optional<Size> to_size(const Val &v) {
  if (v < 0 || v > std::numeric_limits<Size>::max())
    return std::nullopt;
  return static_cast<Size>(v);
}

inline std::string to_string(const Val &v) { return v.str(); }

/// Half-open interval [lo, hi).
struct Interval {
  Addr lo = 0;
  Addr hi = 0;

  bool empty() const { return hi <= lo; }
  Addr size() const { return empty() ? 0 : hi - lo; }
  bool contains(Addr a) const { return lo <= a && a < hi; }
  friend bool operator==(const Interval &, const Interval &) = default;
};

/// Set of addresses stored as sorted, disjoint, non-adjacent intervals.
class AddrSet {
public:
  AddrSet() = default;
  AddrSet(std::initializer_list<Addr> addrs) {
    for (Addr a : addrs)
      insert(a);
  }

  static AddrSet range(Addr lo, Addr hi) {
    AddrSet s;
    s.insert(Interval{lo, hi});
    return s;
  }

  void insert(Addr a) { insert(Interval{a, a + 1}); }

  void insert(Interval iv) {
    if (iv.empty())
      return;
    auto it = std::lower_bound(
        runs_.begin(), runs_.end(), iv,
        [](const Interval &x, const Interval &y) { return x.hi < y.lo; });
    auto first = it;
    while (it != runs_.end() && it->lo <= iv.hi) {
      iv.lo = std::min(iv.lo, it->lo);
      iv.hi = std::max(iv.hi, it->hi);
      ++it;
    }
    it = runs_.erase(first, it);
    runs_.insert(it, iv);
  }

  void insert(const AddrSet &other) {
    for (const Interval &iv : other.runs_)
      insert(iv);
  }

  void erase(Interval iv) {
    if (iv.empty())
      return;
    std::vector<Interval> out;
    out.reserve(runs_.size() + 1);
    for (const Interval &r : runs_) {
      if (r.hi <= iv.lo || iv.hi <= r.lo) {
        out.push_back(r);
        continue;
      }
      if (r.lo < iv.lo)
        out.push_back(Interval{r.lo, iv.lo});
      if (iv.hi < r.hi)
        out.push_back(Interval{iv.hi, r.hi});
    }
    runs_ = std::move(out);
  }

  bool contains(Addr a) const {
    auto it = std::upper_bound(
        runs_.begin(), runs_.end(), a,
        [](Addr x, const Interval &r) { return x < r.hi; });
    return it != runs_.end() && it->contains(a);
  }

  bool intersects(Interval iv) const {
    for (const Interval &r : runs_)
      if (r.lo < iv.hi && iv.lo < r.hi)
        return true;
    return false;
  }

  bool intersects(const AddrSet &other) const {
    for (const Interval &r : other.runs_)
      if (intersects(r))
        return true;
    return false;
  }

  bool subset_of(const AddrSet &other) const {
    for (const Interval &r : runs_) {
      auto it = std::upper_bound(
          other.runs_.begin(), other.runs_.end(), r.lo,
          [](Addr x, const Interval &o) { return x < o.hi; });
      if (it == other.runs_.end() || it->lo > r.lo || it->hi < r.hi)
        return false;
    }
    return true;
  }

  bool empty() const { return runs_.empty(); }

  Addr count() const {
    Addr n = 0;
    for (const Interval &r : runs_)
      n += r.size();
    return n;
  }

  /// Address at position `slot` in ascending order.
  std::optional<Addr> nth(Addr slot) const {
    for (const Interval &r : runs_) {
      if (slot < r.size())
        return r.lo + slot;
      slot -= r.size();
    }
    return std::nullopt;
  }

  const std::vector<Interval> &intervals() const { return runs_; }

  friend bool operator==(const AddrSet &, const AddrSet &) = default;

private:
  std::vector<Interval> runs_;
};

inline AddrSet set_union(AddrSet a, const AddrSet &b) {
  a.insert(b);
  return a;
}

inline std::ostream &operator<<(std::ostream &os, const AddrSet &s) {
  os << '{';
  bool first = true;
  for (const Interval &r : s.intervals()) {
    if (!first)
      os << ", ";
    first = false;
    if (r.size() == 1)
      os << r.lo;
    else
      os << '[' << r.lo << ',' << r.hi << ')';
  }
  return os << '}';
}

/// Finite partial map from addresses to values. Addresses outside the
/// domain are inaccessible; there is no default value.
class Heap {
public:
  using Map = std::map<Addr, Val>;

  Heap() = default;
  Heap(std::initializer_list<std::pair<const Addr, Val>> init) : cells_(init) {}

  std::optional<Val> read(Addr a) const {
    auto it = cells_.find(a);
    if (it == cells_.end())
      return std::nullopt;
    return it->second;
  }

  const Val *find(Addr a) const {
    auto it = cells_.find(a);
    return it == cells_.end() ? nullptr : &it->second;
  }

  bool defined(Addr a) const { return cells_.count(a) != 0; }

  /// Client-side store: only succeeds on addresses already in the domain.
  bool assign(Addr a, Val v) {
    auto it = cells_.find(a);
    if (it == cells_.end())
      return false;
    it->second = std::move(v);
    return true;
  }

  /// Allocator-side store: extends the domain if needed.
  void define(Addr a, Val v) { cells_[a] = std::move(v); }

  void define(Interval iv, const Val &v) {
    auto hint = cells_.lower_bound(iv.lo);
    for (Addr a = iv.lo; a < iv.hi; ++a) {
      if (hint != cells_.end() && hint->first == a) {
        hint->second = v;
        ++hint;
      } else {
        hint = std::next(cells_.emplace_hint(hint, a, v));
      }
    }
  }

  /// Defines every address of `iv` that is currently undefined, keeping
  /// existing entries.
  void define_missing(Interval iv, const Val &v) {
    auto hint = cells_.lower_bound(iv.lo);
    for (Addr a = iv.lo; a < iv.hi; ++a) {
      if (hint != cells_.end() && hint->first == a)
        ++hint;
      else
        hint = std::next(cells_.emplace_hint(hint, a, v));
    }
  }

  void undefine(Addr a) { cells_.erase(a); }

  void undefine(Interval iv) {
    if (iv.empty())
      return;
    cells_.erase(cells_.lower_bound(iv.lo), cells_.lower_bound(iv.hi));
  }

  /// True iff no address of `iv` is in the domain.
  bool all_undefined(Interval iv) const {
    if (iv.empty())
      return true;
    auto it = cells_.lower_bound(iv.lo);
    return it == cells_.end() || it->first >= iv.hi;
  }

  /// True iff every address of `iv` is in the domain.
  bool all_defined(Interval iv) const {
    if (iv.empty())
      return true;
    auto it = cells_.lower_bound(iv.lo);
    for (Addr a = iv.lo; a < iv.hi; ++a, ++it)
      if (it == cells_.end() || it->first != a)
        return false;
    return true;
  }

  AddrSet domain() const {
    AddrSet s;
    for (const auto &[a, v] : cells_)
      s.insert(a);
    return s;
  }

  std::size_t size() const { return cells_.size(); }
  const Map &cells() const { return cells_; }

  friend bool operator==(const Heap &, const Heap &) = default;

private:
  Map cells_;
};

inline std::ostream &operator<<(std::ostream &os, const Heap &h) {
  os << '{';
  bool first = true;
  for (const auto &[a, v] : h.cells()) {
    if (!first)
      os << ", ";
    first = false;
    os << a << "->" << v;
  }
  return os << '}';
}

inline std::optional<Val> heap_read(const Heap &h, Addr a) { return h.read(a); }

/// Returns the updated heap, or nullopt when `a` is not in the domain.
inline std::optional<Heap> heap_write(Heap h, Addr a, Val v) {
  if (!h.assign(a, std::move(v)))
    return std::nullopt;
  return h;
}

inline Heap heap_define(Heap h, const AddrSet &range, const Val &v) {
  for (const Interval &iv : range.intervals())
    h.define(iv, v);
  return h;
}

inline Heap heap_undefine(Heap h, const AddrSet &range) {
  for (const Interval &iv : range.intervals())
    h.undefine(iv);
  return h;
}

/// Agreement of two heaps on every address of `s`, where both being
/// undefined counts as agreement.
inline bool heap_eq_on(const Heap &h1, const Heap &h2, const AddrSet &s) {
  for (const Interval &iv : s.intervals()) {
    auto i1 = h1.cells().lower_bound(iv.lo);
    auto i2 = h2.cells().lower_bound(iv.lo);
    auto e1 = h1.cells().lower_bound(iv.hi);
    auto e2 = h2.cells().lower_bound(iv.hi);
    for (; i1 != e1 && i2 != e2; ++i1, ++i2)
      if (i1->first != i2->first || i1->second != i2->second)
        return false;
    if (i1 != e1 || i2 != e2)
      return false;
  }
  return true;
}

/// First address of `s` where the heaps disagree, if any.
inline std::optional<Addr> heap_diff_on(const Heap &h1, const Heap &h2,
                                        const AddrSet &s) {
  for (const Interval &iv : s.intervals()) {
    if (heap_eq_on(h1, h2, AddrSet::range(iv.lo, iv.hi)))
      continue;
    for (Addr a = iv.lo; a < iv.hi; ++a) {
      const Val *v1 = h1.find(a);
      const Val *v2 = h2.find(a);
      if ((v1 == nullptr) != (v2 == nullptr) || (v1 && *v1 != *v2))
        return a;
    }
  }
  return std::nullopt;
}

} // namespace gai
