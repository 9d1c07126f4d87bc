// Concrete allocation strategies and the strategy selection syntax.
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gai/alloc_model.hpp"

namespace gai {

struct SegmentParams {
  Addr n1 = 0;
  Addr n2 = 0;
  Addr n3 = 0;

  bool valid() const { return n1 <= n2 && n2 <= n3 && n3 <= kHeapMax; }
};

inline std::string params_string(const SegmentParams &p) {
  return std::to_string(p.n1) + "," + std::to_string(p.n2) + "," +
         std::to_string(p.n3);
}

namespace detail {
inline void require_valid(const SegmentParams &p) {
  if (!p.valid())
    throw std::invalid_argument("segment requires N1 <= N2 <= N3 <= 2^32");
}
} // namespace detail

/// First-fit allocator over (N2, N3). With `guarded` set, each block is
/// followed by one cell that stays undefined.
class EagerAlloc {
public:
  using State = std::map<Addr, Size>; // live block start -> size

  explicit EagerAlloc(SegmentParams p, bool guarded = false)
      : p_(p), guarded_(guarded) {
    detail::require_valid(p);
  }

  std::string spec() const {
    return std::string(guarded_ ? "guarded-eager:" : "eager:") +
           params_string(p_);
  }
  Addr null() const { return p_.n2; }
  const SegmentParams &params() const { return p_; }

  State init(Heap &h) const {
    h.undefine(Interval{p_.n2, p_.n3});
    return {};
  }

  Addr malloc(Heap &h, State &st, Size s) const {
    auto a = find(h, st, s);
    if (!a)
      return null();
    if (s > 0)
      h.define(Interval{*a, *a + s}, Val(0));
    st.emplace(*a, s);
    return *a;
  }

  void free(Heap &h, State &st, Addr a) const {
    auto it = st.find(a);
    if (it == st.end())
      return;
    h.undefine(Interval{a, a + it->second});
    st.erase(it);
  }

private:
  // Lowest a > N2 whose block [a, a+need) lies in the segment, is wholly
  // undefined, and contains no block start (nor, when guarded, a guard cell).
  // Covering a start would swallow the address of a zero-size block.
  std::optional<Addr> find(const Heap &h, const State &st, Size s) const {
    if (p_.n3 <= p_.n2 + 1)
      return std::nullopt;
    Size need = (s == 0 ? 1 : s) + (guarded_ ? 1 : 0);
    if (s > p_.n3)
      return std::nullopt;

    std::vector<Addr> blocked;
    for (auto it = h.cells().lower_bound(p_.n2 + 1);
         it != h.cells().end() && it->first < p_.n3; ++it)
      blocked.push_back(it->first);
    for (const auto &[a, k] : st) {
      blocked.push_back(a);
      if (guarded_)
        blocked.push_back(a + k);
    }
    std::sort(blocked.begin(), blocked.end());

    Addr a = p_.n2 + 1;
    for (Addr b : blocked) {
      if (b < a)
        continue;
      if (b - a >= need)
        break;
      a = b + 1;
    }
    if (a >= p_.n3 || p_.n3 - a < need)
      return std::nullopt;
    return a;
  }

  SegmentParams p_;
  bool guarded_;
};

/// Bump-pointer allocator over [N2+1, N3). With `lenient` set, init keeps
/// the null cell readable.
class BumpAlloc {
public:
  using State = Addr;

  explicit BumpAlloc(SegmentParams p, bool lenient = false)
      : p_(p), lenient_(lenient) {
    detail::require_valid(p);
  }

  std::string spec() const {
    return std::string(lenient_ ? "lenient-bump:" : "bump:") +
           params_string(p_);
  }
  Addr null() const { return p_.n2; }
  const SegmentParams &params() const { return p_; }

  State init(Heap &h) const {
    if (p_.n2 + 1 < p_.n3)
      h.define_missing(Interval{p_.n2 + 1, p_.n3}, Val(0));
    if (lenient_)
      h.define(p_.n2, Val(0));
    else
      h.undefine(p_.n2);
    return p_.n2 + 1;
  }

  // A zero-size request behaves as size one; otherwise a later block would
  // reuse the same address.
  Addr malloc(Heap &, State &st, Size s) const {
    Size step = s == 0 ? 1 : s;
    if (st > p_.n3 || p_.n3 - st < step)
      return null();
    Addr a = st;
    st += step;
    return a;
  }

  void free(Heap &, State &, Addr) const {}

private:
  SegmentParams p_;
  bool lenient_;
};

/// Commits to one of two equal semispaces depending on a client-visible
/// cell of the first allocation.
class CuriousAlloc {
public:
  struct NoAlloc {
    friend bool operator==(NoAlloc, NoAlloc) { return true; }
  };
  struct FirstAlloc {
    Addr a;
    Size k;
    friend bool operator==(const FirstAlloc &, const FirstAlloc &) = default;
  };
  struct Committed {
    Addr lo;
    Addr hi; // inclusive
    friend bool operator==(const Committed &, const Committed &) = default;
  };
  using State = std::variant<NoAlloc, FirstAlloc, Committed>;

  CuriousAlloc(unsigned m, Addr heapMax) : m_(m), heap_max_(heapMax) {
    if (m < 1 || m > 31)
      throw std::invalid_argument("curious: m must be in [1,31]");
    if (heapMax < upper_max() || heapMax >= kHeapMax)
      throw std::invalid_argument("curious: heapMax must be in [2^m, 2^32)");
  }

  std::string spec() const {
    return "curious:" + std::to_string(m_) + "," + std::to_string(heap_max_);
  }
  Addr null() const { return 0; }
  Addr lower_max() const { return Addr{1} << (m_ - 1); }
  Addr upper_max() const { return Addr{1} << m_; }
  Addr heap_max() const { return heap_max_; }

  State init(Heap &h) const {
    h.undefine(Interval{0, heap_max_ + 1});
    return NoAlloc{};
  }

  Addr malloc(Heap &h, State &st, Size k) const {
    if (k == 0)
      return null();
    Addr a = null();
    if (std::holds_alternative<NoAlloc>(st)) {
      Addr first = upper_max() + 1;
      if (fits(h, first, heap_max_, first, k)) {
        a = first;
        st = FirstAlloc{a, k};
      }
    } else {
      if (auto *fa = std::get_if<FirstAlloc>(&st)) {
        const Val *v = h.find(fa->a);
        if (v && *v > 0)
          st = Committed{lower_max() + 1, upper_max()};
        else
          st = Committed{1, lower_max()};
      }
      const Committed &c = std::get<Committed>(st);
      if (auto found = avail_min(h, c.lo, c.hi, k))
        a = *found;
    }
    if (a != null())
      h.define(Interval{a, a + k}, Val(0));
    return a;
  }

  void free(Heap &, State &, Addr) const {}

private:
  // [a, a+k) inside [lo, hi] and disjoint from dom(h).
  static bool fits(const Heap &h, Addr lo, Addr hi, Addr a, Size k) {
    if (a < lo || a > hi || hi - a + 1 < k)
      return false;
    return h.all_undefined(Interval{a, a + k});
  }

  static std::optional<Addr> avail_min(const Heap &h, Addr lo, Addr hi,
                                       Size k) {
    if (hi < lo || hi - lo + 1 < k)
      return std::nullopt;
    Addr a = lo;
    auto it = h.cells().lower_bound(lo);
    while (true) {
      if (a > hi || hi - a + 1 < k)
        return std::nullopt;
      while (it != h.cells().end() && it->first < a)
        ++it;
      if (it == h.cells().end() || it->first >= a + k)
        return a;
      a = it->first + 1;
    }
  }

  unsigned m_;
  Addr heap_max_;
};

/// Every allocation fails. The null cell is made inaccessible.
class NullAlloc {
public:
  using State = std::monostate;

  explicit NullAlloc(Addr null = 0) : null_(null) {}

  std::string spec() const {
    return null_ == 0 ? std::string("null") : "null:" + std::to_string(null_);
  }
  Addr null() const { return null_; }
  State init(Heap &h) const {
    h.undefine(null_);
    return {};
  }
  Addr malloc(Heap &, State &, Size) const { return null_; }
  void free(Heap &, State &, Addr) const {}

private:
  Addr null_;
};

/// Fails zero-size requests, delegating everything else.
class NoZeroAlloc {
public:
  using State = AnyState;

  explicit NoZeroAlloc(Strategy inner) : inner_(std::move(inner)) {}

  std::string spec() const { return "nozero(" + inner_.spec() + ")"; }
  Addr null() const { return inner_.null(); }
  State init(Heap &h) const { return inner_.init(h); }
  Addr malloc(Heap &h, State &st, Size k) const {
    if (k == 0)
      return inner_.null();
    return inner_.malloc(h, st, k);
  }
  void free(Heap &h, State &st, Addr a) const { inner_.free(h, st, a); }

private:
  Strategy inner_;
};

inline Strategy eager(SegmentParams p) { return EagerAlloc(p); }
inline Strategy guarded_eager(SegmentParams p) { return EagerAlloc(p, true); }
inline Strategy bump(SegmentParams p) { return BumpAlloc(p); }
inline Strategy lenient_bump(SegmentParams p) { return BumpAlloc(p, true); }
inline Strategy curious(unsigned m, Addr heapMax) {
  return CuriousAlloc(m, heapMax);
}
inline Strategy null_alloc(Addr null = 0) { return NullAlloc(null); }
inline Strategy no_zero(Strategy inner) { return NoZeroAlloc(std::move(inner)); }

// ---------------------------------------------------------------------------
// Selection strings

namespace detail {

inline std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

inline std::vector<Addr> parse_numbers(const std::string &s,
                                       const std::string &what) {
  std::vector<Addr> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string tok = trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad number '" + tok + "' in " + what);
    out.push_back(std::stoull(tok));
    if (comma == std::string::npos)
      break;
    pos = comma + 1;
  }
  return out;
}

} // namespace detail

/// Parses `eager:N1,N2,N3`, `guarded-eager:...`, `bump:...`,
/// `lenient-bump:...`, `curious:m,heapMax`, `null`, `null:A`, `nozero(<s>)`.
inline Strategy parse_strategy(const std::string &text) {
  std::string s = detail::trim(text);
  if (s.rfind("nozero(", 0) == 0) {
    if (s.back() != ')')
      throw std::invalid_argument("unterminated nozero(...)");
    return no_zero(parse_strategy(s.substr(7, s.size() - 8)));
  }
  std::string name = s, args;
  if (auto colon = s.find(':'); colon != std::string::npos) {
    name = detail::trim(s.substr(0, colon));
    args = s.substr(colon + 1);
  }
  if (name == "null") {
    if (args.empty())
      return null_alloc();
    auto v = detail::parse_numbers(args, s);
    if (v.size() != 1)
      throw std::invalid_argument("null takes one address");
    return null_alloc(v[0]);
  }
  if (name == "curious") {
    auto v = detail::parse_numbers(args, s);
    if (v.size() != 2)
      throw std::invalid_argument("curious takes m,heapMax");
    return curious(static_cast<unsigned>(v[0]), v[1]);
  }
  if (name == "eager" || name == "guarded-eager" || name == "bump" ||
      name == "lenient-bump") {
    auto v = detail::parse_numbers(args, s);
    if (v.size() != 3)
      throw std::invalid_argument(name + " takes N1,N2,N3");
    SegmentParams p{v[0], v[1], v[2]};
    if (name == "eager")
      return eager(p);
    if (name == "guarded-eager")
      return guarded_eager(p);
    if (name == "bump")
      return bump(p);
    return lenient_bump(p);
  }
  throw std::invalid_argument("unknown allocator '" + s + "'");
}

/// Family strings list selection strings separated by ';'.
inline std::vector<Strategy> parse_family(const std::string &text) {
  std::vector<Strategy> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t semi = text.find(';', pos);
    std::string item = detail::trim(text.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos));
    if (!item.empty())
      out.push_back(parse_strategy(item));
    if (semi == std::string::npos)
      break;
    pos = semi + 1;
  }
  if (out.empty())
    throw std::invalid_argument("empty allocator family");
  return out;
}

} // namespace gai
