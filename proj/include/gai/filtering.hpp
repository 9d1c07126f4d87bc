// Symbolic filter, concrete residue and trace similarity.
#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "gai/alloc_model.hpp"
#include "gai/notac/ast.hpp"

namespace gai {

using notac::Event;
using notac::Trace;

struct FilterOutcome {
  Trace residue;
  AllocationMap passed; // never shrinks
  SymbolicSeq consumed;
  SymbolicSeq unconsumed; // only nonempty under FilterMode::AllowTail
};

// Exact follows the rules as written: the trace must use up the whole
// sequence. AllowTail also accepts a leftover suffix of the sequence once the
// trace ends, which is how the off-by-one free example is usually read.
enum class FilterMode { Exact, AllowTail };

/// Whether Free(a) passes against the head of `rest`, with `prefix` already
/// consumed (only its first `len` events count).
inline bool x_filter_free(const AllocationMap &m, Addr a,
                          const SymbolicSeq &seq, std::size_t len) {
  if (len >= seq.size() || !seq[len].is_free())
    return false;
  auto i = free_index(seq, seq[len].n, len);
  if (!i)
    return false;
  const AllocEntry *e = m.find(*i);
  return e && e->a == a && e->k == seq[*i - 1].n;
}

inline bool x_filter_free(const AllocationMap &m, Addr a,
                          const SymbolicSeq &prefix, const SymbolicSeq &rest) {
  SymbolicSeq all = prefix;
  all.insert(all.end(), rest.begin(), rest.end());
  return x_filter_free(m, a, all, prefix.size());
}

/// Runs the filter relation left to right. nullopt when an allocation event
/// disagrees with the sequence, or (Exact) the sequence is not used up.
inline std::optional<FilterOutcome> sym_filter(const Trace &t,
                                               const SymbolicSeq &s,
                                               FilterMode mode = FilterMode::Exact) {
  FilterOutcome out;
  std::size_t j = 0; // cursor into s
  for (const Event &e : t) {
    switch (e.kind) {
    case Event::Kind::Malloc:
      if (j >= s.size() || !s[j].is_malloc() || s[j].n != e.n)
        return std::nullopt;
      out.passed.add(AllocEntry{e.a, e.n, j + 1});
      ++j;
      break;
    case Event::Kind::MFail:
      if (j >= s.size() || !s[j].is_fail() || s[j].n != e.n)
        return std::nullopt;
      ++j;
      break;
    case Event::Kind::Free:
      if (x_filter_free(out.passed, e.a, s, j))
        ++j;
      else
        out.residue.push_back(e);
      break;
    case Event::Kind::Obs:
    case Event::Kind::Cast:
      out.residue.push_back(e);
      break;
    }
  }
  if (j != s.size() && mode == FilterMode::Exact)
    return std::nullopt;
  out.consumed.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(j));
  out.unconsumed.assign(s.begin() + static_cast<std::ptrdiff_t>(j), s.end());
  return out;
}

struct SimilarResult {
  bool similar = false;
  SymbolicSeq sigma; // witness when similar
  Trace residue;
};

namespace detail {

// The allocation events (kind and size) and the obs/cast events must agree
// for any common filter to exist.
inline bool similar_prefilter(const Trace &t1, const Trace &t2) {
  auto next = [](const Trace &t, std::size_t &i, bool alloc) -> const Event * {
    for (; i < t.size(); ++i) {
      bool isAlloc = t[i].is_alloc();
      bool isObsCast = t[i].kind == Event::Kind::Obs || t[i].kind == Event::Kind::Cast;
      if ((alloc && isAlloc) || (!alloc && isObsCast))
        return &t[i++];
    }
    return nullptr;
  };
  for (bool alloc : {true, false}) {
    std::size_t i = 0, j = 0;
    while (true) {
      const Event *a = next(t1, i, alloc);
      const Event *b = next(t2, j, alloc);
      if (!a || !b) {
        if (a || b)
          return false;
        break;
      }
      if (alloc ? (a->kind != b->kind || a->n != b->n) : !(*a == *b))
        return false;
    }
  }
  return true;
}

// Search for a common filter. The first trace leads and chooses how each of
// its frees is filtered; the second follows, which is deterministic because
// the filter relation is deterministic once the sequence is fixed.
class SimilaritySearch {
public:
  SimilaritySearch(const Trace &t1, const Trace &t2) : t1_(t1), t2_(t2) {
    for (const Event &e : t1)
      if (e.kind == Event::Kind::Malloc)
        addr1_.push_back(e.a);
    for (const Event &e : t2)
      if (e.kind == Event::Kind::Malloc)
        addr2_.push_back(e.a);
  }

  std::optional<SymbolicSeq> run() {
    State s;
    if (!dfs(s))
      return std::nullopt;
    return to_sigma(path_);
  }

private:
  // A filter element: M(k), Fail(k), or a free of the r-th successful
  // malloc (r is 1-based).
  struct Item {
    enum class Kind { M, Fail, F } kind;
    std::uint64_t n;
    bool operator==(const Item &) const = default;
  };

  struct State {
    std::size_t i1 = 0, i2 = 0;
    std::size_t m1 = 0, m2 = 0;        // successful mallocs seen
    std::deque<Item> sym;              // produced by t1, not yet used by t2
    std::deque<std::size_t> res;       // t1 residue indices awaiting t2
    std::vector<Addr> forbidden;       // t1 residue frees since last item
  };

  enum class Follow { Progress, Wait, Fail };

  Follow follow(State &s) const {
    bool t1done = s.i1 == t1_.size();
    while (s.i2 < t2_.size()) {
      const Event &e = t2_[s.i2];
      switch (e.kind) {
      case Event::Kind::Malloc:
      case Event::Kind::MFail: {
        if (s.sym.empty())
          return t1done ? Follow::Fail : Follow::Wait;
        const Item &it = s.sym.front();
        Item::Kind want = e.kind == Event::Kind::Malloc ? Item::Kind::M : Item::Kind::Fail;
        if (it.kind != want || it.n != e.n)
          return Follow::Fail;
        if (want == Item::Kind::M)
          ++s.m2;
        s.sym.pop_front();
        break;
      }
      case Event::Kind::Obs:
      case Event::Kind::Cast:
        if (!take_residue(s, e, t1done))
          return s.res.empty() && !t1done ? Follow::Wait : Follow::Fail;
        break;
      case Event::Kind::Free: {
        if (s.sym.empty() && !t1done)
          return Follow::Wait;
        if (!s.sym.empty()) {
          const Item &it = s.sym.front();
          if (it.kind == Item::Kind::F && addr2_[it.n - 1] == e.a) {
            s.sym.pop_front();
            break;
          }
        }
        if (!take_residue(s, e, t1done))
          return s.res.empty() && !t1done ? Follow::Wait : Follow::Fail;
        break;
      }
      }
      ++s.i2;
    }
    return Follow::Progress;
  }

  bool take_residue(State &s, const Event &e, bool) const {
    if (s.res.empty() || !(t1_[s.res.front()] == e))
      return false;
    s.res.pop_front();
    return true;
  }

  std::string key(const State &s) const {
    std::string k;
    auto put = [&](std::uint64_t v) {
      k.append(reinterpret_cast<const char *>(&v), sizeof v);
    };
    put(s.i1);
    put(s.i2);
    put(s.sym.size());
    for (const Item &it : s.sym) {
      put(static_cast<std::uint64_t>(it.kind));
      put(it.n);
    }
    put(s.res.size());
    for (std::size_t r : s.res)
      put(r);
    for (Addr a : s.forbidden)
      put(a);
    return k;
  }

  bool dfs(State s) {
    Follow f = follow(s);
    if (f == Follow::Fail)
      return false;
    if (s.i1 == t1_.size())
      return s.i2 == t2_.size() && s.sym.empty() && s.res.empty();
    // Residue the second trace can never consume.
    if (s.res.size() > t2_.size() - s.i2)
      return false;
    std::string k = key(s);
    if (failed_.count(k))
      return false;

    const Event &e = t1_[s.i1];
    bool ok = false;
    switch (e.kind) {
    case Event::Kind::Malloc:
    case Event::Kind::MFail: {
      State n = s;
      Item it{e.kind == Event::Kind::Malloc ? Item::Kind::M : Item::Kind::Fail, e.n};
      if (it.kind == Item::Kind::M)
        ++n.m1;
      n.sym.push_back(it);
      n.forbidden.clear();
      ++n.i1;
      ok = produce(n, it);
      break;
    }
    case Event::Kind::Obs:
    case Event::Kind::Cast: {
      State n = s;
      n.res.push_back(n.i1);
      ++n.i1;
      ok = dfs(std::move(n));
      break;
    }
    case Event::Kind::Free: {
      bool blocked = std::find(s.forbidden.begin(), s.forbidden.end(), e.a) != s.forbidden.end();
      if (!blocked)
        for (std::size_t r = 1; r <= s.m1 && !ok; ++r) {
          if (addr1_[r - 1] != e.a)
            continue;
          State n = s;
          Item it{Item::Kind::F, r};
          n.sym.push_back(it);
          n.forbidden.clear();
          ++n.i1;
          ok = produce(n, it);
        }
      if (!ok) {
        State n = s;
        n.res.push_back(n.i1);
        if (!blocked) {
          n.forbidden.push_back(e.a);
          std::sort(n.forbidden.begin(), n.forbidden.end());
        }
        ++n.i1;
        ok = dfs(std::move(n));
      }
      break;
    }
    }
    if (!ok)
      failed_.insert(std::move(k));
    return ok;
  }

  bool produce(State n, const Item &it) {
    path_.push_back(it);
    if (dfs(std::move(n)))
      return true;
    path_.pop_back();
    return false;
  }

  static SymbolicSeq to_sigma(const std::vector<Item> &items) {
    SymbolicSeq s;
    std::uint64_t m = 0;
    for (const Item &it : items) {
      switch (it.kind) {
      case Item::Kind::M:
        s.push_back(SymEvent::malloc(it.n));
        ++m;
        break;
      case Item::Kind::Fail:
        s.push_back(SymEvent::fail(it.n));
        break;
      case Item::Kind::F:
        s.push_back(SymEvent::free(m - it.n));
        break;
      }
    }
    return s;
  }

  const Trace &t1_;
  const Trace &t2_;
  std::vector<Addr> addr1_, addr2_;
  std::vector<Item> path_;
  std::unordered_set<std::string> failed_;
};

} // namespace detail

/// Decides whether some sequence filters both traces to the same residue.
inline SimilarResult similar(const Trace &t1, const Trace &t2) {
  SimilarResult r;
  if (!detail::similar_prefilter(t1, t2))
    return r;
  detail::SimilaritySearch search(t1, t2);
  auto sigma = search.run();
  if (!sigma)
    return r;
  auto f1 = sym_filter(t1, *sigma);
  auto f2 = sym_filter(t2, *sigma);
  if (!f1 || !f2 || !(f1->residue == f2->residue))
    throw std::logic_error("similarity witness does not filter both traces");
  r.similar = true;
  r.sigma = std::move(*sigma);
  r.residue = std::move(f1->residue);
  return r;
}

inline bool is_similar(const Trace &t1, const Trace &t2) {
  return similar(t1, t2).similar;
}

/// Reference decision by enumeration: every filter that consumes t1 is
/// built from a labeling of t1's frees (residue, or pass with some z).
inline bool similar_bruteforce(const Trace &t1, const Trace &t2,
                               std::size_t bound = 10) {
  if (t1.size() > bound || t2.size() > bound)
    throw std::invalid_argument("trace longer than brute-force bound");
  SymbolicSeq sigma;
  std::function<bool(std::size_t, std::uint64_t)> go =
      [&](std::size_t i, std::uint64_t m) -> bool {
    if (i == t1.size()) {
      auto f1 = sym_filter(t1, sigma);
      auto f2 = sym_filter(t2, sigma);
      return f1 && f2 && f1->residue == f2->residue;
    }
    const Event &e = t1[i];
    switch (e.kind) {
    case Event::Kind::Malloc: {
      sigma.push_back(SymEvent::malloc(e.n));
      bool ok = go(i + 1, m + 1);
      sigma.pop_back();
      return ok;
    }
    case Event::Kind::MFail: {
      sigma.push_back(SymEvent::fail(e.n));
      bool ok = go(i + 1, m);
      sigma.pop_back();
      return ok;
    }
    case Event::Kind::Free:
      for (std::uint64_t z = 0; z < m; ++z) {
        sigma.push_back(SymEvent::free(z));
        bool ok = go(i + 1, m);
        sigma.pop_back();
        if (ok)
          return true;
      }
      return go(i + 1, m);
    default:
      return go(i + 1, m);
    }
  };
  return go(0, 0);
}

/// Prefix lengths p of `run` such that t is similar to run[0..p).
inline std::vector<std::size_t> prefixes_similar_to(const Trace &t,
                                                    const Trace &run) {
  std::size_t allocs = 0, visible = 0;
  for (const Event &e : t) {
    if (e.is_alloc())
      ++allocs;
    else if (e.kind != Event::Kind::Free)
      ++visible;
  }
  std::vector<std::size_t> out;
  std::size_t a = 0, v = 0;
  for (std::size_t p = 0; p <= run.size(); ++p) {
    if (p > 0) {
      const Event &e = run[p - 1];
      if (e.is_alloc())
        ++a;
      else if (e.kind != Event::Kind::Free)
        ++v;
    }
    if (a > allocs || v > visible)
      break;
    if (a < allocs || v < visible)
      continue;
    Trace prefix(run.begin(), run.begin() + static_cast<std::ptrdiff_t>(p));
    if (is_similar(t, prefix))
      out.push_back(p);
  }
  return out;
}

inline std::string format_similar(const SimilarResult &r) {
  std::string s = r.similar ? "similar\n" : "not similar\n";
  if (r.similar) {
    s += "sigma: " + to_string(r.sigma) + "\n";
    s += "residue: " + notac::to_string(r.residue) + "\n";
  }
  return s;
}

} // namespace gai
