// Bounded differential checking of gradual allocator independence.
//
// The quantification over all well-formed allocators is replaced by a finite
// family. A Violation is a real counterexample; Pass only means none was found
// within the family and the fuel bound.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gai/allocators.hpp"
#include "gai/filtering.hpp"
#include "gai/notac/interp.hpp"
#include "gai/notac/trace_io.hpp"
#include "gai/wf_check.hpp"

namespace gai {

inline constexpr const char *kDefaultFamily =
    "eager:0,64,1024; guarded-eager:0,64,1024; bump:0,64,1024; "
    "lenient-bump:0,64,128; curious:8,1023; null; nozero(bump:0,64,1024)";

// Above every segment of the default family, and above curious's heapMax.
inline constexpr Addr kDefaultEnvBase = 4096;

struct EventClass {
  enum class Kind { Alloc, Cast, Singleton };
  Kind kind = Kind::Singleton;
  Size n = 0;  // Alloc
  Event event; // Singleton

  bool contains(const Event &e) const {
    switch (kind) {
    case Kind::Alloc: return e.is_alloc() && e.n == n;
    case Kind::Cast: return e.kind == Event::Kind::Cast;
    case Kind::Singleton: return e == event;
    }
    return false;
  }
};

inline EventClass dchar(const Event &e) {
  if (e.is_alloc())
    return EventClass{EventClass::Kind::Alloc, e.n, {}};
  if (e.kind == Event::Kind::Cast)
    return EventClass{EventClass::Kind::Cast, 0, {}};
  return EventClass{EventClass::Kind::Singleton, 0, e};
}

inline std::string to_string(const EventClass &c) {
  switch (c.kind) {
  case EventClass::Kind::Alloc: return "alloc(" + std::to_string(c.n) + ")";
  case EventClass::Kind::Cast: return "cast(*)";
  case EventClass::Kind::Singleton: return "{" + notac::to_string(c.event) + "}";
  }
  return "?";
}

/// Program, environment and initial heap shared by every run.
struct GaiInput {
  notac::Program program;
  notac::Env env;
  Heap h0;
  AddrSet reserved;
  std::uint64_t fuel = notac::kDefaultFuel;
};

inline GaiInput make_input(const notac::Program &p, Addr base = kDefaultEnvBase,
                           const std::map<std::string, Val> &init = {},
                           std::uint64_t fuel = notac::kDefaultFuel) {
  notac::EnvSetup s = notac::make_env(p, base, init);
  return GaiInput{p, std::move(s.env), std::move(s.heap), std::move(s.reserved), fuel};
}

struct MemberRun {
  Strategy alpha;
  notac::Outcome outcome;
};

inline MemberRun run_member(const Strategy &alpha, const GaiInput &in) {
  return MemberRun{alpha, notac::run(in.env, alpha, in.program, in.h0, in.fuel)};
}

/// Unknown only arises when a run ran out of fuel before a decision.
enum class Tri { No, Yes, Unknown };

inline const char *tri_name(Tri t) {
  switch (t) {
  case Tri::No: return "no";
  case Tri::Yes: return "yes";
  case Tri::Unknown: return "unknown";
  }
  return "?";
}

struct Membership {
  Tri answer = Tri::No;
  std::size_t prefix = 0; // length of the similar prefix when Yes
};

namespace detail {

struct Counts {
  std::size_t allocs = 0, visible = 0;
};

inline Counts counts(const Trace &t) {
  Counts c;
  for (const Event &e : t) {
    if (e.is_alloc())
      ++c.allocs;
    else if (e.kind != Event::Kind::Free)
      ++c.visible;
  }
  return c;
}

// A similar prefix must have exactly t's alloc and obs/cast counts. Once the
// run has gone past either count, no later prefix can match.
inline Tri undecided(const notac::Outcome &o, Counts want) {
  if (o.status != notac::Status::OutOfFuel)
    return Tri::No;
  Counts have = counts(o.trace);
  return have.allocs > want.allocs || have.visible > want.visible ? Tri::No
                                                                  : Tri::Unknown;
}

} // namespace detail

/// Whether some prefix of the member's run is similar to t.
inline Membership impact_member(const MemberRun &run, const Trace &t) {
  auto ps = prefixes_similar_to(t, run.outcome.trace);
  if (!ps.empty())
    return {Tri::Yes, ps.front()};
  return {detail::undecided(run.outcome, detail::counts(t)), 0};
}

inline Membership impact_member(const Strategy &alpha, const GaiInput &in,
                                const Trace &t) {
  return impact_member(run_member(alpha, in), t);
}

struct Reach {
  Tri answer = Tri::No;
  std::optional<Event> event; // the class member reached, when Yes
  std::size_t prefix = 0;
};

/// Candidate class members drawn from the run itself. A malloc at the very
/// end of t.eta is never freed inside t.eta, so its address cannot affect
/// filtering and one successful candidate per size is enough. Cast values
/// land in the residue and must match exactly, so only casts the run
/// performs can ever be reached.
inline std::vector<Event> class_candidates(const EventClass &cls,
                                           const Trace &run) {
  std::vector<Event> out;
  switch (cls.kind) {
  case EventClass::Kind::Alloc:
    for (const Event &e : run)
      if (e.kind == Event::Kind::Malloc && e.n == cls.n) {
        out.push_back(e);
        break;
      }
    out.push_back(Event::mfail(cls.n));
    break;
  case EventClass::Kind::Cast:
    for (const Event &e : run)
      if (e.kind == Event::Kind::Cast &&
          std::find(out.begin(), out.end(), e) == out.end())
        out.push_back(e);
    break;
  case EventClass::Kind::Singleton:
    out.push_back(cls.event);
    break;
  }
  return out;
}

/// Whether the member is in the progress impact of t for the class.
inline Reach reaches_class(const MemberRun &run, const Trace &t,
                           const EventClass &cls) {
  Trace ext = t;
  ext.emplace_back();
  for (const Event &c : class_candidates(cls, run.outcome.trace)) {
    ext.back() = c;
    auto ps = prefixes_similar_to(ext, run.outcome.trace);
    if (!ps.empty())
      return {Tri::Yes, c, ps.front()};
  }
  Event rep = cls.kind == EventClass::Kind::Alloc  ? Event::mfail(cls.n)
              : cls.kind == EventClass::Kind::Cast ? Event::cast(Val(0))
                                                   : cls.event;
  ext.back() = rep;
  return {detail::undecided(run.outcome, detail::counts(ext)), std::nullopt, 0};
}

inline Reach reaches_class(const Strategy &alpha, const GaiInput &in,
                           const Trace &t, const EventClass &cls) {
  return reaches_class(run_member(alpha, in), t, cls);
}

enum class Verdict { Pass, Violation, Inconclusive, PreconditionFailed };

inline const char *verdict_name(Verdict v) {
  switch (v) {
  case Verdict::Pass: return "pass";
  case Verdict::Violation: return "violation";
  case Verdict::Inconclusive: return "inconclusive";
  case Verdict::PreconditionFailed: return "precondition-failed";
  }
  return "?";
}

inline int exit_code(Verdict v) {
  switch (v) {
  case Verdict::Pass: return 0;
  case Verdict::Violation: return 1;
  default: return 2;
  }
}

inline const char *clause_for(const EventClass &c) {
  switch (c.kind) {
  case EventClass::Kind::Alloc: return "malloc-progress";
  case EventClass::Kind::Cast: return "cast-progress";
  case EventClass::Kind::Singleton: return "noninterference";
  }
  return "?";
}

struct GaiViolation {
  std::string clause;
  std::string producer;      // alpha
  std::string witness;       // beta, in the impact of t but not reaching
  std::size_t index = 0;     // position of eta in the producer's trace
  Trace t;                   // producer prefix
  Event eta;
  Trace producer_trace;      // full producer run
  Trace witness_trace;       // full witness run
  std::size_t witness_prefix = 0; // witness prefix similar to t
  SymbolicSeq sigma;         // filter connecting t and that prefix
};

struct GaiOptions {
  std::size_t wf_trials = 64;
  std::size_t wf_max_len = 12;
  std::uint64_t wf_seed = 1;
  bool check_precondition = true;
};

struct GaiReport {
  Verdict verdict = Verdict::Pass;
  std::optional<GaiViolation> violation;
  std::vector<std::string> notes; // fuel exhaustion, unknown probes, wf failures
  std::vector<std::pair<std::string, notac::Outcome>> runs;
};

/// Checks every family member against the well-formedness clauses for the
/// program's reserved memory. Returns the failing reports.
inline std::vector<WfReport> check_family(const std::vector<Strategy> &family,
                                          const GaiInput &in,
                                          const GaiOptions &opt) {
  std::vector<WfReport> bad;
  for (const Strategy &a : family)
    for (WfReport &r : wf_check(a, in.reserved, in.h0, opt.wf_trials,
                                opt.wf_seed, opt.wf_max_len))
      if (!r.pass)
        bad.push_back(std::move(r));
  return bad;
}

/// For every producer, position and member of the impact set, the member
/// must reach the downgrading class of the next event. The first failure in
/// (producer, position, witness) order is reported.
inline GaiReport gai_check(const GaiInput &in, const std::vector<Strategy> &family,
                           const GaiOptions &opt = {}) {
  GaiReport rep;
  if (opt.check_precondition) {
    auto bad = check_family(family, in, opt);
    if (!bad.empty()) {
      rep.verdict = Verdict::PreconditionFailed;
      for (const WfReport &r : bad)
        rep.notes.push_back(r.strategy + " fails " + clause_name(r.clause) +
                            " (seed " + std::to_string(r.seed) + ", trial " +
                            std::to_string(r.trial) + ")");
      return rep;
    }
  }

  std::vector<MemberRun> runs;
  for (const Strategy &a : family) {
    runs.push_back(run_member(a, in));
    rep.runs.emplace_back(a.spec(), runs.back().outcome);
    if (runs.back().outcome.status == notac::Status::OutOfFuel)
      rep.notes.push_back(a.spec() + " ran out of fuel after " +
                          std::to_string(runs.back().outcome.steps) + " steps");
  }

  bool unknown = false;
  for (std::size_t ai = 0; ai < runs.size(); ++ai) {
    const Trace &u = runs[ai].outcome.trace;
    Trace t;
    for (std::size_t k = 0; k < u.size(); t.push_back(u[k]), ++k) {
      EventClass cls = dchar(u[k]);
      for (std::size_t bi = 0; bi < runs.size(); ++bi) {
        if (bi == ai)
          continue; // the producer reaches its own next event
        Membership m = impact_member(runs[bi], t);
        if (m.answer == Tri::No)
          continue;
        if (m.answer == Tri::Unknown) {
          unknown = true;
          continue;
        }
        Reach r = reaches_class(runs[bi], t, cls);
        if (r.answer == Tri::Unknown)
          unknown = true;
        if (r.answer != Tri::No)
          continue;
        GaiViolation v;
        v.clause = clause_for(cls);
        v.producer = runs[ai].alpha.spec();
        v.witness = runs[bi].alpha.spec();
        v.index = k;
        v.t = t;
        v.eta = u[k];
        v.producer_trace = u;
        v.witness_trace = runs[bi].outcome.trace;
        v.witness_prefix = m.prefix;
        Trace wp(v.witness_trace.begin(),
                 v.witness_trace.begin() + static_cast<std::ptrdiff_t>(m.prefix));
        v.sigma = similar(t, wp).sigma;
        rep.verdict = Verdict::Violation;
        rep.violation = std::move(v);
        return rep;
      }
    }
  }
  if (unknown) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back("some impact or progress probe was undecided within fuel");
  }
  return rep;
}

/// Re-executes the two named allocators and re-checks the failed condition.
inline bool gai_replay(const GaiInput &in, const GaiViolation &v) {
  MemberRun a = run_member(parse_strategy(v.producer), in);
  MemberRun b = run_member(parse_strategy(v.witness), in);
  const Trace &u = a.outcome.trace;
  if (v.index >= u.size() || !(u[v.index] == v.eta))
    return false;
  if (!std::equal(v.t.begin(), v.t.end(), u.begin()) || v.t.size() != v.index)
    return false;
  if (!(b.outcome.trace == v.witness_trace))
    return false;
  Trace wp(b.outcome.trace.begin(),
           b.outcome.trace.begin() + static_cast<std::ptrdiff_t>(v.witness_prefix));
  if (!is_similar(v.t, wp))
    return false;
  return reaches_class(b, v.t, dchar(v.eta)).answer == Tri::No;
}

inline std::string format_gai(const GaiReport &r) {
  std::ostringstream os;
  os << "verdict: " << verdict_name(r.verdict) << '\n';
  for (const auto &[spec, o] : r.runs)
    os << "run " << spec << ": " << notac::status_name(o.status) << ", "
       << o.trace.size() << " events\n";
  if (r.violation) {
    const GaiViolation &v = *r.violation;
    os << "clause: " << v.clause << '\n'
       << "producer: " << v.producer << '\n'
       << "witness: " << v.witness << '\n'
       << "index: " << v.index << '\n'
       << "prefix: " << notac::to_string(v.t) << '\n'
       << "next event: " << notac::to_string(v.eta) << " (class "
       << to_string(dchar(v.eta)) << ")\n"
       << "witness prefix: "
       << notac::to_string(Trace(v.witness_trace.begin(),
                                 v.witness_trace.begin() +
                                     static_cast<std::ptrdiff_t>(v.witness_prefix)))
       << '\n'
       << "sigma: " << to_string(v.sigma) << '\n'
       << "witness trace: " << notac::to_string(v.witness_trace) << '\n';
  }
  for (const std::string &n : r.notes)
    os << "note: " << n << '\n';
  if (r.verdict == Verdict::Pass)
    os << "note: no violation within the family and fuel bound\n";
  return os.str();
}

inline nlohmann::json gai_json(const GaiReport &r) {
  nlohmann::json j;
  j["verdict"] = verdict_name(r.verdict);
  j["notes"] = r.notes;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto &[spec, o] : r.runs)
    runs.push_back({{"allocator", spec},
                    {"status", notac::status_name(o.status)},
                    {"trace", notac::trace_to_text(o.trace)}});
  j["runs"] = runs;
  if (r.violation) {
    const GaiViolation &v = *r.violation;
    j["violation"] = {{"clause", v.clause},
                      {"producer", v.producer},
                      {"witness", v.witness},
                      {"index", v.index},
                      {"prefix", notac::trace_to_text(v.t)},
                      {"event", notac::event_json(v.eta)},
                      {"witness_prefix_length", v.witness_prefix},
                      {"sigma", to_string(v.sigma)},
                      {"producer_trace", notac::trace_to_text(v.producer_trace)},
                      {"witness_trace", notac::trace_to_text(v.witness_trace)}};
  }
  return j;
}

} // namespace gai
