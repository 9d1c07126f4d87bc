// Allocation strategies, symbolic allocation sequences and feasibility.
#pragma once

#include <any>
#include <cctype>
#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gai/core.hpp"

namespace gai {

// ---------------------------------------------------------------------------
// Strategies

/// A concrete strategy is a value type with its own State. Operations work in
/// place; callers copy heap and state when they need the old ones.
template <class S>
concept AllocStrategy = std::copy_constructible<typename S::State> &&
    requires(const S s, Heap &h, typename S::State &st, Size k, Addr a) {
  { s.spec() } -> std::convertible_to<std::string>;
  { s.null() } -> std::same_as<Addr>;
  { s.init(h) } -> std::same_as<typename S::State>;
  { s.malloc(h, st, k) } -> std::same_as<Addr>;
  { s.free(h, st, a) };
};

/// Opaque allocator state for the type-erased Strategy.
using AnyState = std::any;

/// Type-erased allocation strategy. Cheap to copy; the model is immutable.
class Strategy {
public:
  template <AllocStrategy S>
  Strategy(S s) : model_(std::make_shared<Model<S>>(std::move(s))) {}

  std::string spec() const { return model_->spec(); }
  Addr null() const { return model_->null(); }
  AnyState init(Heap &h) const { return model_->init(h); }
  Addr malloc(Heap &h, AnyState &st, Size k) const {
    return model_->malloc(h, st, k);
  }
  void free(Heap &h, AnyState &st, Addr a) const { model_->free(h, st, a); }

  /// Recovers the concrete strategy, if it has type S.
  template <class S> const S *as() const {
    auto *m = dynamic_cast<const Model<S> *>(model_.get());
    return m ? &m->impl : nullptr;
  }

private:
  struct Concept {
    virtual ~Concept() = default;
    virtual std::string spec() const = 0;
    virtual Addr null() const = 0;
    virtual AnyState init(Heap &) const = 0;
    virtual Addr malloc(Heap &, AnyState &, Size) const = 0;
    virtual void free(Heap &, AnyState &, Addr) const = 0;
  };

  template <class S> struct Model final : Concept {
    explicit Model(S s) : impl(std::move(s)) {}
    std::string spec() const override { return impl.spec(); }
    Addr null() const override { return impl.null(); }
    AnyState init(Heap &h) const override { return AnyState(impl.init(h)); }
    Addr malloc(Heap &h, AnyState &st, Size k) const override {
      return impl.malloc(h, unwrap(st), k);
    }
    void free(Heap &h, AnyState &st, Addr a) const override {
      impl.free(h, unwrap(st), a);
    }
    // Wrappers keep their inner strategy's state as is.
    static typename S::State &unwrap(AnyState &st) {
      if constexpr (std::is_same_v<typename S::State, AnyState>)
        return st;
      else
        return std::any_cast<typename S::State &>(st);
    }
    S impl;
  };

  std::shared_ptr<const Concept> model_;
};

// ---------------------------------------------------------------------------
// Symbolic allocation sequences

struct SymEvent {
  enum class Kind { Malloc, Fail, Free };
  Kind kind = Kind::Malloc;
  std::uint64_t n = 0; // size for Malloc/Fail, back-count z for Free

  static SymEvent malloc(Size k) { return {Kind::Malloc, k}; }
  static SymEvent fail(Size k) { return {Kind::Fail, k}; }
  static SymEvent free(std::uint64_t z) { return {Kind::Free, z}; }

  bool is_malloc() const { return kind == Kind::Malloc; }
  bool is_fail() const { return kind == Kind::Fail; }
  bool is_free() const { return kind == Kind::Free; }

  friend bool operator==(const SymEvent &, const SymEvent &) = default;
};

using SymbolicSeq = std::vector<SymEvent>;

inline std::string to_string(const SymEvent &e) {
  switch (e.kind) {
  case SymEvent::Kind::Malloc:
    return "M" + std::to_string(e.n);
  case SymEvent::Kind::Fail:
    return "Fail" + std::to_string(e.n);
  case SymEvent::Kind::Free:
    return "F" + std::to_string(e.n);
  }
  return "?";
}

inline std::string to_string(const SymbolicSeq &s) {
  if (s.empty())
    return "eps";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i)
      out += " . ";
    out += to_string(s[i]);
  }
  return out;
}

inline std::ostream &operator<<(std::ostream &os, const SymEvent &e) {
  return os << to_string(e);
}

/// Reads what to_string writes. Items may also be separated by commas or
/// whitespace; "eps" or an empty string is the empty sequence.
inline SymbolicSeq parse_symseq(const std::string &text) {
  SymbolicSeq out;
  std::size_t i = 0;
  auto sep = [&](char c) {
    return c == '.' || c == ',' || std::isspace(static_cast<unsigned char>(c));
  };
  while (i < text.size()) {
    if (sep(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !sep(text[j]))
      ++j;
    std::string tok = text.substr(i, j - i);
    i = j;
    if (tok == "eps")
      continue;
    std::string head, digits;
    std::size_t d = tok.find_first_of("0123456789");
    if (d != std::string::npos) {
      head = tok.substr(0, d);
      digits = tok.substr(d);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad symbolic event '" + tok + "'");
    std::uint64_t n = std::stoull(digits);
    if (head == "M")
      out.push_back(SymEvent::malloc(n));
    else if (head == "Fail")
      out.push_back(SymEvent::fail(n));
    else if (head == "F")
      out.push_back(SymEvent::free(n));
    else
      throw std::invalid_argument("bad symbolic event '" + tok + "'");
  }
  return out;
}

/// 1-based index of the malloc freed by F(z) appended to `s`, i.e. the z-th
/// successful malloc counting backwards from the end of `s`.
/// Only the first `len` events of `s` are considered.
inline std::optional<std::size_t> free_index(const SymbolicSeq &s,
                                             std::uint64_t z,
                                             std::size_t len) {
  for (std::size_t n = len; n > 0; --n) {
    if (!s[n - 1].is_malloc())
      continue;
    if (z == 0)
      return n;
    --z;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> free_index(const SymbolicSeq &s,
                                             std::uint64_t z) {
  return free_index(s, z, s.size());
}

/// True iff the free at 1-based position j releases the malloc at i.
inline bool malloc_free_rel(const SymbolicSeq &s, std::size_t i,
                            std::size_t j) {
  if (i < 1 || j <= i || j > s.size())
    return false;
  if (!s[i - 1].is_malloc() || !s[j - 1].is_free())
    return false;
  return free_index(s, s[j - 1].n, j - 1) == i;
}

inline bool symseq_well_formed(const SymbolicSeq &s) {
  std::vector<bool> freed(s.size() + 1, false);
  for (std::size_t j = 1; j <= s.size(); ++j) {
    if (!s[j - 1].is_free())
      continue;
    auto i = free_index(s, s[j - 1].n, j - 1);
    if (!i || freed[*i])
      return false;
    freed[*i] = true;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Allocation maps

struct AllocEntry {
  Addr a = 0;
  Size k = 0;
  std::size_t i = 0;
  friend bool operator==(const AllocEntry &, const AllocEntry &) = default;
};

/// Live allocations keyed by their position in the symbolic sequence.
class AllocationMap {
public:
  void add(AllocEntry e) { entries_[e.i] = e; }
  void erase(std::size_t i) { entries_.erase(i); }

  const AllocEntry *find(std::size_t i) const {
    auto it = entries_.find(i);
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(const AllocEntry &e) const {
    const AllocEntry *f = find(e.i);
    return f && *f == e;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const AllocationMap &,
                         const AllocationMap &) = default;

private:
  std::map<std::size_t, AllocEntry> entries_;
};

inline AddrSet addresses_of(const AllocationMap &m) {
  AddrSet s;
  for (const auto &[i, e] : m)
    s.insert(Interval{e.a, e.a + e.k});
  return s;
}

inline std::ostream &operator<<(std::ostream &os, const AllocationMap &m) {
  os << '{';
  bool first = true;
  for (const auto &[i, e] : m) {
    if (!first)
      os << ", ";
    first = false;
    os << '(' << e.a << ',' << e.k << ';' << e.i << ')';
  }
  return os << '}';
}

// ---------------------------------------------------------------------------
// Client updates

struct SlotWrite {
  std::uint64_t slot = 0;
  Val value;
};

/// Writes land on the sorted allowed set, slot taken modulo its size.
using ClientUpdate = std::vector<SlotWrite>;
using UpdateSeq = std::vector<ClientUpdate>;

inline void apply_update(Heap &h, const ClientUpdate &u, const AddrSet &allowed) {
  Addr n = allowed.count();
  if (n == 0)
    return;
  for (const SlotWrite &w : u) {
    auto a = allowed.nth(w.slot % n);
    if (a)
      h.assign(*a, w.value);
  }
}

// ---------------------------------------------------------------------------
// Feasibility

/// Heap, state and allocation map threaded through the feasibility rules.
struct PlayState {
  Heap heap;
  AnyState state;
  AllocationMap map;
};

/// One step of the play relation. `prefix` is the sequence before `ev`.
/// Returns false when the strategy's behavior contradicts `ev`; the
/// configuration is then unspecified.
inline bool play_step_inplace(const Strategy &alpha, PlayState &ps,
                              const SymbolicSeq &prefix, std::size_t len,
                              const SymEvent &ev) {
  switch (ev.kind) {
  case SymEvent::Kind::Malloc: {
    Addr a = alpha.malloc(ps.heap, ps.state, ev.n);
    if (a == alpha.null())
      return false;
    ps.map.add(AllocEntry{a, ev.n, len + 1});
    return true;
  }
  case SymEvent::Kind::Fail:
    return alpha.malloc(ps.heap, ps.state, ev.n) == alpha.null();
  case SymEvent::Kind::Free: {
    auto i = free_index(prefix, ev.n, len);
    if (!i)
      return false;
    const AllocEntry *e = ps.map.find(*i);
    if (!e)
      return false;
    Addr a = e->a;
    alpha.free(ps.heap, ps.state, a);
    ps.map.erase(*i);
    return true;
  }
  }
  return false;
}

/// Pure form of the play relation.
inline std::optional<PlayState> play_step(const Strategy &alpha,
                                          const AllocationMap &m,
                                          const Heap &h, const AnyState &st,
                                          const SymbolicSeq &prefix,
                                          const SymEvent &ev) {
  PlayState ps{h, st, m};
  if (!play_step_inplace(alpha, ps, prefix, prefix.size(), ev))
    return std::nullopt;
  return ps;
}

/// Fast-forward relation: client update before each symbolic event.
/// Throws std::invalid_argument when |updates| != |s|.
inline std::optional<PlayState> feasible_run(const Strategy &alpha,
                                             const AddrSet &reserved,
                                             const Heap &h0,
                                             const AnyState &st0,
                                             const UpdateSeq &updates,
                                             const SymbolicSeq &s) {
  if (updates.size() != s.size())
    throw std::invalid_argument("update sequence length differs from symbolic sequence");
  PlayState ps{h0, st0, {}};
  for (std::size_t j = 0; j < s.size(); ++j) {
    apply_update(ps.heap, updates[j], set_union(addresses_of(ps.map), reserved));
    if (!play_step_inplace(alpha, ps, s, j, s[j]))
      return std::nullopt;
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Generators

using Rng = std::mt19937_64;

/// Deterministic generator seeded from a list of integers.
inline Rng make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Sizes favour small and zero allocations so segments fill and fail.
inline Size gen_size(Rng &rng) {
  std::uniform_int_distribution<int> pick(0, 9);
  int c = pick(rng);
  if (c < 2)
    return 0;
  if (c < 8)
    return std::uniform_int_distribution<Size>(1, 8)(rng);
  return std::uniform_int_distribution<Size>(9, 64)(rng);
}

/// Random well-formed sequence of length at most maxLen. Failed mallocs are
/// emitted as Fail events; whether an allocator agrees is not considered.
inline SymbolicSeq gen_symbolic_seq(std::uint64_t seed, std::size_t maxLen) {
  Rng rng = make_rng({seed, 0x5eedULL});
  SymbolicSeq s;
  if (maxLen == 0)
    return s;
  std::size_t len = std::uniform_int_distribution<std::size_t>(0, maxLen)(rng);
  std::vector<std::size_t> live; // positions of unfreed mallocs
  for (std::size_t j = 0; j < len; ++j) {
    int c = std::uniform_int_distribution<int>(0, 9)(rng);
    if (c < 3 && !live.empty()) {
      std::size_t pick = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
      std::size_t target = live[pick];
      std::uint64_t z = 0;
      for (std::size_t p = j; p > target; --p)
        if (s[p - 1].is_malloc())
          ++z;
      s.push_back(SymEvent::free(z));
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
    } else if (c < 4) {
      s.push_back(SymEvent::fail(gen_size(rng)));
    } else {
      s.push_back(SymEvent::malloc(gen_size(rng)));
      live.push_back(j + 1);
    }
  }
  return s;
}

inline ClientUpdate gen_update(Rng &rng) {
  ClientUpdate u;
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t slot = std::uniform_int_distribution<std::uint64_t>(0, 1u << 20)(rng);
    std::int64_t v = std::uniform_int_distribution<std::int64_t>(-1000, 1000)(rng);
    u.push_back(SlotWrite{slot, Val(v)});
  }
  return u;
}

inline UpdateSeq gen_update_seq(std::uint64_t seed, std::size_t len) {
  Rng rng = make_rng({seed, 0x0bdaULL});
  UpdateSeq us;
  us.reserve(len);
  for (std::size_t i = 0; i < len; ++i)
    us.push_back(gen_update(rng));
  return us;
}

} // namespace gai
