// Test-only helpers: independent oracles, a broken allocator and trace
// generators over the small event alphabet.
#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gai/alloc_model.hpp"
#include "gai/filtering.hpp"

#ifndef GAI_CORPUS_DIR
#define GAI_CORPUS_DIR "corpus"
#endif

namespace gai::test {

inline std::string corpus_path(const std::string &rel) {
  return std::string(GAI_CORPUS_DIR) + "/" + rel;
}

inline std::string read_text(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Hands out [N2+1, N2+1+k) on every request, so the second live block
// overlaps the first.
class OverlappingAlloc {
public:
  using State = int;
  std::string spec() const { return "overlapping"; }
  Addr null() const { return 100; }
  State init(Heap &h) const {
    h.undefine(Interval{100, 200});
    return 0;
  }
  Addr malloc(Heap &h, State &, Size k) const {
    if (k == 0)
      return 101;
    h.define(Interval{101, 101 + k}, Val(0));
    return 101;
  }
  void free(Heap &h, State &, Addr a) const { h.undefine(a); }
};

inline Strategy overlapping() { return OverlappingAlloc{}; }

// ---------------------------------------------------------------------------
// Symbolic oracles written straight from the recursive definitions.

/// free_index by listing the successful mallocs and counting from the end.
inline std::optional<std::size_t> oracle_free_index(const SymbolicSeq &s,
                                                    std::uint64_t z) {
  std::vector<std::size_t> mallocs;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].kind == SymEvent::Kind::Malloc)
      mallocs.push_back(i + 1);
  if (z >= mallocs.size())
    return std::nullopt;
  return mallocs[mallocs.size() - 1 - z];
}

inline bool oracle_well_formed(const SymbolicSeq &s) {
  std::vector<std::size_t> targets;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j].kind != SymEvent::Kind::Free)
      continue;
    SymbolicSeq before(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(j));
    auto i = oracle_free_index(before, s[j].n);
    if (!i)
      return false;
    for (std::size_t t : targets)
      if (t == *i)
        return false;
    targets.push_back(*i);
  }
  return true;
}

/// The filter relation as a recursive judgement over (trace, sigma, passed).
/// Returns the residue when the whole of both is consumed.
inline std::optional<Trace> oracle_filter(const Trace &t, const SymbolicSeq &s) {
  std::map<std::size_t, std::pair<Addr, Size>> passed; // malloc index -> block
  Trace residue;
  std::size_t ti = 0, si = 0;
  while (ti < t.size()) {
    const Event &e = t[ti];
    if (e.kind == Event::Kind::Obs || e.kind == Event::Kind::Cast) {
      residue.push_back(e);
      ++ti;
      continue;
    }
    if (e.kind == Event::Kind::Malloc || e.kind == Event::Kind::MFail) {
      if (si == s.size())
        return std::nullopt;
      bool want_ok = e.kind == Event::Kind::Malloc;
      SymEvent::Kind k = want_ok ? SymEvent::Kind::Malloc : SymEvent::Kind::Fail;
      if (s[si].kind != k || s[si].n != e.n)
        return std::nullopt;
      if (want_ok)
        passed[si + 1] = {e.a, e.n};
      ++si;
      ++ti;
      continue;
    }
    // free: passes when the next symbolic event is a free naming a block
    // recorded at exactly this address
    bool pass = false;
    if (si < s.size() && s[si].kind == SymEvent::Kind::Free) {
      SymbolicSeq before(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(si));
      if (auto i = oracle_free_index(before, s[si].n)) {
        auto it = passed.find(*i);
        pass = it != passed.end() && it->second.first == e.a;
      }
    }
    if (pass)
      ++si;
    else
      residue.push_back(e);
    ++ti;
  }
  if (si != s.size())
    return std::nullopt;
  return residue;
}

/// Similarity by enumerating every symbolic sequence that could consume t1:
/// one symbolic event per allocation of t1, and a free or nothing per free.
inline bool oracle_similar(const Trace &t1, const Trace &t2) {
  SymbolicSeq s;
  std::function<bool(std::size_t, std::uint64_t)> go = [&](std::size_t i,
                                                         std::uint64_t live) {
    if (i == t1.size()) {
      auto r1 = oracle_filter(t1, s);
      auto r2 = oracle_filter(t2, s);
      return r1 && r2 && *r1 == *r2;
    }
    const Event &e = t1[i];
    if (e.kind == Event::Kind::Malloc) {
      s.push_back(SymEvent::malloc(e.n));
      bool ok = go(i + 1, live + 1);
      s.pop_back();
      return ok;
    }
    if (e.kind == Event::Kind::MFail) {
      s.push_back(SymEvent::fail(e.n));
      bool ok = go(i + 1, live);
      s.pop_back();
      return ok;
    }
    if (e.kind == Event::Kind::Free) {
      for (std::uint64_t z = 0; z < live; ++z) {
        s.push_back(SymEvent::free(z));
        bool ok = go(i + 1, live);
        s.pop_back();
        if (ok)
          return true;
      }
    }
    return go(i + 1, live);
  };
  return go(0, 0);
}

/// Reads the allocation events of a trace as a symbolic sequence: every
/// malloc and failure, and each free of a live block start. Other frees are
/// left out and end up in the residue.
inline SymbolicSeq symbolize(const Trace &t) {
  SymbolicSeq s;
  std::vector<std::pair<Addr, std::size_t>> live; // block start, sigma index
  for (const Event &e : t) {
    if (e.kind == Event::Kind::Malloc) {
      live.emplace_back(e.a, s.size());
      s.push_back(SymEvent::malloc(e.n));
    } else if (e.kind == Event::Kind::MFail) {
      s.push_back(SymEvent::fail(e.n));
    } else if (e.kind == Event::Kind::Free) {
      auto it = std::find_if(live.rbegin(), live.rend(),
                             [&](const auto &b) { return b.first == e.a; });
      if (it == live.rend())
        continue;
      std::uint64_t z = 0;
      for (std::size_t j = it->second + 1; j < s.size(); ++j)
        z += s[j].is_malloc() ? 1 : 0;
      s.push_back(SymEvent::free(z));
      live.erase(std::next(it).base());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Event alphabet: Malloc/Fail sizes {0,4,8}, addresses {100,101,200}, frees
// of those addresses, obs and cast of {0,1,100}.

inline std::vector<Event> small_alphabet() {
  std::vector<Event> out;
  for (Size n : {0, 4, 8}) {
    for (Addr a : {100, 101, 200})
      out.push_back(Event::malloc(n, a));
    out.push_back(Event::mfail(n));
  }
  for (Addr a : {100, 101, 200})
    out.push_back(Event::free(a));
  for (int v : {0, 1, 100}) {
    out.push_back(Event::obs(v));
    out.push_back(Event::cast(v));
  }
  return out;
}

inline Trace random_trace(std::mt19937_64 &rng, std::size_t maxLen) {
  static const std::vector<Event> alpha = small_alphabet();
  std::size_t len = std::uniform_int_distribution<std::size_t>(0, maxLen)(rng);
  Trace t;
  for (std::size_t i = 0; i < len; ++i)
    t.push_back(alpha[std::uniform_int_distribution<std::size_t>(0, alpha.size() - 1)(rng)]);
  return t;
}

/// Renames addresses by a permutation of {100,101,200}: similar traces
/// usually come from the same program run under two allocators.
inline Trace permute_addresses(const Trace &t, const std::array<Addr, 3> &to) {
  auto map = [&](Addr a) { return a == 100 ? to[0] : a == 101 ? to[1] : to[2]; };
  Trace out = t;
  for (Event &e : out)
    if (e.kind == Event::Kind::Malloc || e.kind == Event::Kind::Free)
      e.a = map(e.a);
  return out;
}

/// A second trace built to pass the allocation/observation prefilter, so the
/// search itself is exercised: same skeleton, addresses drawn afresh, frees
/// added or dropped at random.
inline Trace related_trace(std::mt19937_64 &rng, const Trace &t, std::size_t maxLen) {
  static const Addr addrs[] = {100, 101, 200};
  auto pick = [&] { return addrs[std::uniform_int_distribution<int>(0, 2)(rng)]; };
  Trace out;
  for (const Event &e : t) {
    int c = std::uniform_int_distribution<int>(0, 9)(rng);
    if (e.kind == Event::Kind::Free) {
      if (c < 2)
        continue;
      out.push_back(c < 5 ? Event::free(pick()) : e);
    } else if (e.kind == Event::Kind::Malloc) {
      out.push_back(c < 5 ? Event::malloc(e.n, pick()) : e);
    } else {
      out.push_back(e);
    }
    if (out.size() < maxLen && std::uniform_int_distribution<int>(0, 9)(rng) == 0)
      out.push_back(Event::free(pick()));
  }
  if (out.size() > maxLen)
    out.resize(maxLen);
  return out;
}

} // namespace gai::test
