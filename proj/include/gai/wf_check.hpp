// Randomized checking of the allocator well-formedness clauses.
//
// A reported failure is a real violation and can be replayed from the
// witness (or from seed and trial). Passing only means no counterexample was
// found in the trials run.
#pragma once

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gai/alloc_model.hpp"

namespace gai {

enum class Clause {
  Basic1,
  Basic2,
  Basic3,
  Basic4,
  Basic5,
  Basic6,
  ZeroAlloc1,
  ZeroAlloc2,
  Rel1,
  Rel2,
};

inline constexpr std::array<Clause, 10> kAllClauses = {
    Clause::Basic1,     Clause::Basic2,     Clause::Basic3, Clause::Basic4,
    Clause::Basic5,     Clause::Basic6,     Clause::ZeroAlloc1,
    Clause::ZeroAlloc2, Clause::Rel1,       Clause::Rel2};

inline const char *clause_name(Clause c) {
  switch (c) {
  case Clause::Basic1: return "Basic-1";
  case Clause::Basic2: return "Basic-2";
  case Clause::Basic3: return "Basic-3";
  case Clause::Basic4: return "Basic-4";
  case Clause::Basic5: return "Basic-5";
  case Clause::Basic6: return "Basic-6";
  case Clause::ZeroAlloc1: return "Zero-Alloc-1";
  case Clause::ZeroAlloc2: return "Zero-Alloc-2";
  case Clause::Rel1: return "Rel-1";
  case Clause::Rel2: return "Rel-2";
  }
  return "?";
}

/// Everything needed to re-execute a trial.
struct WfWitness {
  SymbolicSeq sigma;
  UpdateSeq u1;
  UpdateSeq u2;
  std::size_t step = 0; // number of events played when the clause failed
  std::string detail;
};

struct WfViolation {
  Clause clause;
  std::size_t step;
  std::string detail;
};

struct WfReport {
  std::string strategy;
  Clause clause = Clause::Basic1;
  bool pass = true;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0; // failing trial, or number of trials on pass
  std::optional<WfWitness> witness;
};

namespace detail {

inline Heap restrict_to(const Heap &h, const AddrSet &s) {
  Heap out;
  for (const Interval &iv : s.intervals())
    for (auto it = h.cells().lower_bound(iv.lo);
         it != h.cells().end() && it->first < iv.hi; ++it)
      out.define(it->first, it->second);
  return out;
}

inline std::string entry_str(const AllocEntry &e) {
  std::ostringstream os;
  os << '(' << e.a << ',' << e.k << ';' << e.i << ')';
  return os.str();
}

// Single-execution clauses that only look at the current map and heap.
inline void check_state(const Strategy &alpha, const AddrSet &reserved,
                        const PlayState &ps, std::size_t step,
                        std::vector<WfViolation> &out) {
  std::vector<AllocEntry> es;
  for (const auto &[i, e] : ps.map)
    es.push_back(e);
  AddrSet client = set_union(addresses_of(ps.map), reserved);

  for (std::size_t x = 0; x < es.size(); ++x)
    for (std::size_t y = x + 1; y < es.size(); ++y) {
      const AllocEntry &p = es[x], &q = es[y];
      if (p.a < q.a + q.k && q.a < p.a + p.k)
        out.push_back({Clause::Basic1, step,
                       entry_str(p) + " overlaps " + entry_str(q)});
      if (p.a == q.a)
        out.push_back({Clause::ZeroAlloc1, step,
                       entry_str(p) + " shares its address with " + entry_str(q)});
    }

  for (const Interval &iv : client.intervals())
    if (!ps.heap.all_defined(iv)) {
      std::ostringstream os;
      os << "client-accessible [" << iv.lo << ',' << iv.hi
         << ") not wholly in dom(H)";
      out.push_back({Clause::Basic2, step, os.str()});
      break;
    }

  for (const AllocEntry &e : es)
    if (reserved.intersects(Interval{e.a, e.a + e.k}))
      out.push_back({Clause::Basic5, step, entry_str(e) + " overlaps reserved memory"});

  if (client.contains(alpha.null()))
    out.push_back({Clause::Basic6, step,
                   "null " + std::to_string(alpha.null()) + " is client-accessible"});

  for (const AllocEntry &e : es)
    if (e.k == 0 && client.contains(e.a))
      out.push_back({Clause::ZeroAlloc2, step,
                     entry_str(e) + " lies in client-accessible memory"});
}

} // namespace detail

/// Checks every clause on one fixed (sigma, u1, u2). An empty result means no
/// violation; a sigma infeasible under u1 is reported through `infeasible`.
inline std::vector<WfViolation> wf_check_run(const Strategy &alpha,
                                             const AddrSet &reserved,
                                             const Heap &h,
                                             const SymbolicSeq &sigma,
                                             const UpdateSeq &u1,
                                             const UpdateSeq &u2,
                                             bool *infeasible = nullptr) {
  std::vector<WfViolation> out;
  if (infeasible)
    *infeasible = false;
  Heap h0 = h;
  AnyState st0 = alpha.init(h0);
  if (!heap_eq_on(h, h0, reserved)) {
    auto a = heap_diff_on(h, h0, reserved);
    out.push_back({Clause::Basic3, 0,
                   "init changed reserved address " + std::to_string(a.value_or(0))});
  }

  PlayState ps{h0, st0, {}};
  std::vector<AllocationMap> maps1;
  detail::check_state(alpha, reserved, ps, 0, out);
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    AddrSet before = set_union(addresses_of(ps.map), reserved);
    apply_update(ps.heap, u1.at(j), before);
    Heap snap = detail::restrict_to(ps.heap, before);
    if (!play_step_inplace(alpha, ps, sigma, j, sigma[j])) {
      if (infeasible)
        *infeasible = true;
      return out;
    }
    AddrSet keep = sigma[j].is_free()
                       ? set_union(addresses_of(ps.map), reserved)
                       : before;
    if (!heap_eq_on(snap, ps.heap, keep)) {
      auto a = heap_diff_on(snap, ps.heap, keep);
      out.push_back({Clause::Basic4, j + 1,
                     to_string(sigma[j]) + " modified client address " +
                         std::to_string(a.value_or(0))});
    }
    detail::check_state(alpha, reserved, ps, j + 1, out);
    maps1.push_back(ps.map);
  }

  PlayState ps2{h0, st0, {}};
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    apply_update(ps2.heap, u2.at(j),
                 set_union(addresses_of(ps2.map), reserved));
    if (!play_step_inplace(alpha, ps2, sigma, j, sigma[j])) {
      out.push_back({Clause::Rel1, j + 1,
                     to_string(sigma[j]) + " infeasible under the second update sequence"});
      break;
    }
    for (const auto &[i, e] : maps1[j]) {
      const AllocEntry *f = ps2.map.find(i);
      if (!f || f->k != e.k) {
        out.push_back({Clause::Rel2, j + 1,
                       detail::entry_str(e) + " has no counterpart in the replayed map"});
        break;
      }
    }
  }
  return out;
}

/// Builds a sigma that is feasible for `alpha` under the updates it draws:
/// each malloc is recorded as M or Fail depending on what the allocator does.
inline std::pair<SymbolicSeq, UpdateSeq>
gen_feasible_trial(const Strategy &alpha, const AddrSet &reserved,
                   const Heap &h, Rng &rng, std::size_t maxLen) {
  SymbolicSeq sigma;
  UpdateSeq u1;
  std::size_t len = std::uniform_int_distribution<std::size_t>(0, maxLen)(rng);
  Heap h0 = h;
  PlayState ps{h0, alpha.init(h0), {}};
  for (std::size_t j = 0; j < len; ++j) {
    ClientUpdate u = gen_update(rng);
    apply_update(ps.heap, u, set_union(addresses_of(ps.map), reserved));
    u1.push_back(u);
    int c = std::uniform_int_distribution<int>(0, 9)(rng);
    if (c < 3 && !ps.map.empty()) {
      std::size_t pick = std::uniform_int_distribution<std::size_t>(0, ps.map.size() - 1)(rng);
      auto it = std::next(ps.map.begin(), static_cast<std::ptrdiff_t>(pick));
      std::size_t target = it->first;
      std::uint64_t z = 0;
      for (std::size_t p = j; p > target; --p)
        if (sigma[p - 1].is_malloc())
          ++z;
      sigma.push_back(SymEvent::free(z));
    } else {
      Size k = gen_size(rng);
      Heap probe_h = ps.heap;
      AnyState probe_s = ps.state;
      Addr a = alpha.malloc(probe_h, probe_s, k);
      sigma.push_back(a == alpha.null() ? SymEvent::fail(k) : SymEvent::malloc(k));
    }
    play_step_inplace(alpha, ps, sigma, j, sigma.back());
  }
  return {sigma, u1};
}

/// Runs `trials` randomized trials and returns one report per clause, in
/// clause order. Each report keeps the first failing trial.
inline std::vector<WfReport> wf_check(const Strategy &alpha,
                                      const AddrSet &reserved, const Heap &h,
                                      std::size_t trials, std::uint64_t seed,
                                      std::size_t maxLen) {
  std::vector<WfReport> reports;
  for (Clause c : kAllClauses)
    reports.push_back(WfReport{alpha.spec(), c, true, seed, trials, std::nullopt});

  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = make_rng({seed, t});
    auto [sigma, u1] = gen_feasible_trial(alpha, reserved, h, rng, maxLen);
    UpdateSeq u2;
    for (std::size_t j = 0; j < sigma.size(); ++j)
      u2.push_back(gen_update(rng));
    for (const WfViolation &v : wf_check_run(alpha, reserved, h, sigma, u1, u2)) {
      WfReport &r = reports[static_cast<std::size_t>(v.clause)];
      if (!r.pass)
        continue;
      r.pass = false;
      r.trial = t;
      r.witness = WfWitness{sigma, u1, u2, v.step, v.detail};
    }
  }
  return reports;
}

inline std::string format_update(const ClientUpdate &u) {
  std::string s = "{";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i)
      s += ", ";
    s += std::to_string(u[i].slot) + ":" + u[i].value.str();
  }
  return s + "}";
}

inline std::string format_report(const WfReport &r) {
  std::ostringstream os;
  os << "clause=" << clause_name(r.clause)
     << " status=" << (r.pass ? "pass" : "fail") << " seed=" << r.seed
     << " trial=" << r.trial << '\n';
  if (r.witness) {
    const WfWitness &w = *r.witness;
    os << "  strategy: " << r.strategy << '\n'
       << "  sigma: " << to_string(w.sigma) << '\n'
       << "  step: " << w.step << '\n'
       << "  detail: " << w.detail << '\n';
    os << "  u1:";
    for (const ClientUpdate &u : w.u1)
      os << ' ' << format_update(u);
    os << "\n  u2:";
    for (const ClientUpdate &u : w.u2)
      os << ' ' << format_update(u);
    os << '\n';
  }
  return os.str();
}

} // namespace gai
