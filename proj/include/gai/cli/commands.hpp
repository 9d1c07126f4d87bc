// gai-lab subcommands. Each returns the process exit code and writes to the
// given streams, so tests can drive them without spawning a process.
//
// Exit codes: 0 ok / pass / similar, 1 violation / failure / mismatch,
// 2 usage, parse or I/O errors (and Inconclusive for gai).
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gai/filtering.hpp"
#include "gai/gai.hpp"
#include "gai/memsafe/differential.hpp"
#include "gai/memsafe/parser.hpp"
#include "gai/notac/parser.hpp"
#include "gai/notac/trace_io.hpp"

namespace gai::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

inline constexpr const char *kDefaultAlloc = "eager:0,64,1024";

class CliError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw CliError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text))
    throw CliError("cannot write '" + path + "'");
}

/// "x=5" pairs; later ones win.
inline std::map<std::string, Val> parse_init(const std::vector<std::string> &items) {
  std::map<std::string, Val> out;
  for (const std::string &s : items) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CliError("--init expects var=value, got '" + s + "'");
    std::string v = s.substr(eq + 1);
    std::size_t d = (!v.empty() && v[0] == '-') ? 1 : 0;
    if (v.size() == d || v.find_first_not_of("0123456789", d) != std::string::npos)
      throw CliError("--init value for '" + s.substr(0, eq) + "' is not an integer");
    out[s.substr(0, eq)] = Val(v);
  }
  return out;
}

inline nlohmann::json trace_json(const Trace &t) {
  nlohmann::json a = nlohmann::json::array();
  for (const Event &e : t)
    a.push_back(nlohmann::json::parse(notac::event_json(e)));
  return a;
}

inline Trace load_trace(const std::string &path) {
  std::istringstream is(read_file(path));
  return notac::read_trace(is);
}

// ---------------------------------------------------------------------------
// run

struct RunSpec {
  std::string program;
  std::string alloc = kDefaultAlloc;
  std::uint64_t fuel = notac::kDefaultFuel;
  Addr base = kDefaultEnvBase;
  std::vector<std::string> init;
  std::string trace_out; // empty: don't write
  bool json = false;
};

inline int cmd_run(const RunSpec &spec, std::ostream &out) {
  notac::Program p = notac::parse(read_file(spec.program));
  Strategy alpha = parse_strategy(spec.alloc);
  notac::EnvSetup env = notac::make_env(p, spec.base, parse_init(spec.init));
  notac::Outcome o = notac::run(env.env, alpha, p, env.heap, spec.fuel);
  if (!spec.trace_out.empty())
    write_file(spec.trace_out, notac::trace_to_text(o.trace));

  std::vector<std::pair<std::string, std::string>> vars;
  for (const std::string &x : p.vars) {
    auto v = o.heap.read(env.env.at(x));
    vars.emplace_back(x, v ? v->str() : "undefined");
  }
  if (spec.json) {
    nlohmann::json j;
    j["allocator"] = alpha.spec();
    j["status"] = notac::status_name(o.status);
    j["steps"] = o.steps;
    if (o.status == notac::Status::Stuck) {
      j["reason"] = o.reason;
      j["at"] = notac::to_string(o.loc);
    }
    j["trace"] = trace_json(o.trace);
    nlohmann::json vj = nlohmann::json::object();
    for (const auto &[x, v] : vars)
      vj[x] = v;
    j["vars"] = vj;
    out << j.dump(2) << '\n';
  } else {
    out << "allocator: " << alpha.spec() << '\n'
        << "status: " << notac::status_name(o.status) << " after " << o.steps << " steps\n";
    if (o.status == notac::Status::Stuck)
      out << "stuck at " << notac::to_string(o.loc) << ": " << o.reason << '\n';
    out << "trace:\n";
    for (const Event &e : o.trace)
      out << "  " << notac::to_string(e) << '\n';
    out << "vars:";
    for (const auto &[x, v] : vars)
      out << ' ' << x << '=' << v;
    out << '\n';
  }
  return o.status == notac::Status::Terminated ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// similar / filter

inline int cmd_similar(const std::string &a, const std::string &b, bool json,
                       std::ostream &out) {
  Trace t1 = load_trace(a), t2 = load_trace(b);
  SimilarResult r = similar(t1, t2);
  if (json) {
    nlohmann::json j{{"similar", r.similar}};
    if (r.similar) {
      j["sigma"] = to_string(r.sigma);
      j["residue"] = trace_json(r.residue);
    }
    out << j.dump(2) << '\n';
  } else {
    out << format_similar(r);
  }
  return r.similar ? kExitOk : kExitFail;
}

inline int cmd_filter(const std::string &trace, const std::string &sigma,
                      bool allow_tail, bool json, std::ostream &out) {
  Trace t = load_trace(trace);
  SymbolicSeq s = parse_symseq(sigma);
  auto f = sym_filter(t, s, allow_tail ? FilterMode::AllowTail : FilterMode::Exact);
  if (json) {
    nlohmann::json j{{"defined", f.has_value()}, {"sigma", to_string(s)}};
    if (f) {
      j["residue"] = trace_json(f->residue);
      j["unconsumed"] = to_string(f->unconsumed);
    }
    out << j.dump(2) << '\n';
  } else if (f) {
    out << "residue: " << notac::to_string(f->residue) << '\n';
    if (allow_tail)
      out << "unconsumed: " << to_string(f->unconsumed) << '\n';
  } else {
    out << "filter undefined for sigma " << to_string(s) << '\n';
  }
  return f ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// gai

struct GaiSpec {
  std::string program;
  std::string family = kDefaultFamily;
  std::uint64_t fuel = notac::kDefaultFuel;
  Addr base = kDefaultEnvBase;
  std::vector<std::string> init;
  GaiOptions opt;
  bool json = false;
};

inline int cmd_gai(const GaiSpec &spec, std::ostream &out) {
  notac::Program p = notac::parse(read_file(spec.program));
  std::vector<Strategy> fam = parse_family(spec.family);
  GaiInput in = make_input(p, spec.base, parse_init(spec.init), spec.fuel);
  GaiReport r = gai_check(in, fam, spec.opt);
  bool replayed = r.violation && gai_replay(in, *r.violation);
  if (spec.json) {
    nlohmann::json j = gai_json(r);
    if (r.violation)
      j["replayed"] = replayed;
    out << j.dump(2) << '\n';
  } else {
    out << format_gai(r);
    if (r.violation)
      out << "replay: " << (replayed ? "confirmed" : "FAILED") << '\n';
  }
  return exit_code(r.verdict);
}

// ---------------------------------------------------------------------------
// wf

struct WfSpec {
  std::string alloc = kDefaultAlloc;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t max_len = 12;
  Addr base = kDefaultEnvBase;
  std::size_t reserved = 4; // reserved cells at base, seeded with 0
  bool json = false;
};

inline int cmd_wf(const WfSpec &spec, std::ostream &out) {
  Strategy alpha = parse_strategy(spec.alloc);
  Heap h;
  AddrSet reserved;
  if (spec.reserved) {
    Interval iv{spec.base, spec.base + spec.reserved};
    h.define(iv, Val(0));
    reserved.insert(iv);
  }
  auto reports = wf_check(alpha, reserved, h, spec.trials, spec.seed, spec.max_len);
  bool ok = std::all_of(reports.begin(), reports.end(),
                        [](const WfReport &r) { return r.pass; });
  if (spec.json) {
    nlohmann::json a = nlohmann::json::array();
    for (const WfReport &r : reports) {
      nlohmann::json j{{"clause", clause_name(r.clause)},
                       {"pass", r.pass},
                       {"seed", r.seed},
                       {"trial", r.trial}};
      if (r.witness) {
        j["sigma"] = to_string(r.witness->sigma);
        j["step"] = r.witness->step;
        j["detail"] = r.witness->detail;
      }
      a.push_back(j);
    }
    out << nlohmann::json{{"strategy", alpha.spec()}, {"trials", spec.trials},
                          {"max_len", spec.max_len}, {"reports", a}}
               .dump(2)
        << '\n';
  } else {
    out << "strategy: " << alpha.spec() << '\n'
        << "trials: " << spec.trials << " (max length " << spec.max_len
        << ", seed " << spec.seed << ")\n"
        << "note: randomized testing; a failure replays from seed and trial, a pass is not a proof\n";
    for (const WfReport &r : reports)
      out << format_report(r);
  }
  return ok ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// ms-run / translate

inline int cmd_ms_run(const std::string &path, const std::vector<std::string> &init,
                      std::uint64_t fuel, bool json, std::ostream &out) {
  memsafe::CmdP c = memsafe::parse(read_file(path));
  memsafe::Outcome o = memsafe::eval_program(c, parse_init(init), fuel);
  if (json) {
    nlohmann::json vars = nlohmann::json::object();
    for (const auto &[x, v] : o.state.locals)
      vars[x] = memsafe::to_string(v);
    nlohmann::json j{{"outcome", memsafe::outcome_name(o.kind)},
                     {"steps", o.steps},
                     {"vars", vars}};
    if (!o.reason.empty())
      j["reason"] = o.reason;
    out << j.dump(2) << '\n';
  } else {
    out << "outcome: " << memsafe::outcome_name(o.kind) << " after " << o.steps << " steps\n";
    if (!o.reason.empty())
      out << "reason: " << o.reason << '\n';
    out << "vars:";
    for (const auto &[x, v] : o.state.locals)
      out << ' ' << x << '=' << memsafe::to_string(v);
    out << '\n';
  }
  return o.kind == memsafe::Outcome::Kind::Ok ? kExitOk : kExitFail;
}

struct TranslateSpec {
  std::string program;
  std::string output; // empty: stdout
  bool check = false;
  std::string family = kDefaultFamily;
  std::vector<std::string> init;
  std::uint64_t fuel = notac::kDefaultFuel;
};

inline int cmd_translate(const TranslateSpec &spec, std::ostream &out) {
  memsafe::CmdP c = memsafe::parse(read_file(spec.program));
  memsafe::Translation t = memsafe::translate(c);
  std::string text = memsafe::translation_text(t);
  if (spec.output.empty())
    out << text;
  else
    write_file(spec.output, text);
  if (!spec.check)
    return kExitOk;
  memsafe::DiffOptions opt;
  opt.notac_fuel = spec.fuel;
  auto rep = memsafe::differential_check(c, parse_init(spec.init),
                                         parse_family(spec.family), opt);
  out << memsafe::format_diff(rep);
  return rep.ok() ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// corpus

struct CorpusCase {
  std::string name;
  std::string file;
  std::string expect; // SAFE or UNSAFE
  std::map<std::string, Val> init;
};

struct CorpusResult {
  CorpusCase c;
  Verdict verdict = Verdict::Pass;
  std::string clause;  // violated clause, if any
  std::string witness; // "producer vs witness"
  double ms = 0;
  std::string error;

  std::string got() const {
    if (!error.empty())
      return "ERROR";
    return verdict == Verdict::Pass ? "SAFE"
           : verdict == Verdict::Violation ? "UNSAFE"
                                           : verdict_name(verdict);
  }
  bool match() const { return got() == c.expect; }
};

inline std::map<std::string, Val> json_init(const nlohmann::json &j) {
  std::map<std::string, Val> out;
  if (j.contains("init"))
    for (const auto &[k, v] : j["init"].items())
      out[k] = Val(v.get<long long>());
  return out;
}

inline std::vector<CorpusCase> load_corpus(const std::string &dir) {
  nlohmann::json m = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  std::vector<CorpusCase> out;
  for (const auto &c : m)
    out.push_back({c.at("name"), c.at("file"), c.at("expect"), json_init(c)});
  std::sort(out.begin(), out.end(),
            [](const CorpusCase &a, const CorpusCase &b) { return a.name < b.name; });
  return out;
}

inline CorpusResult run_corpus_case(const std::string &dir, const CorpusCase &c,
                                    const std::vector<Strategy> &family,
                                    std::uint64_t fuel) {
  CorpusResult r;
  r.c = c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    notac::Program p = notac::parse(read_file(dir + "/" + c.file));
    GaiReport rep = gai_check(make_input(p, kDefaultEnvBase, c.init, fuel), family);
    r.verdict = rep.verdict;
    if (rep.violation) {
      r.clause = rep.violation->clause;
      r.witness = rep.violation->producer + " vs " + rep.violation->witness;
    }
  } catch (const std::exception &e) {
    r.error = e.what();
  }
  r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Cases run concurrently; results come back in case-name order.
inline std::vector<CorpusResult> run_corpus(const std::string &dir,
                                            const std::vector<Strategy> &family,
                                            std::uint64_t fuel) {
  std::vector<CorpusCase> cases = load_corpus(dir);
  std::vector<std::future<CorpusResult>> jobs;
  for (const CorpusCase &c : cases)
    jobs.push_back(std::async(std::launch::async, run_corpus_case, dir, c, family, fuel));
  std::vector<CorpusResult> out;
  for (auto &j : jobs)
    out.push_back(j.get());
  return out;
}

struct MsCase {
  std::string file;
  std::map<std::string, Val> init;
};

inline std::vector<MsCase> load_ms_suite(const std::string &dir) {
  nlohmann::json m = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  std::vector<MsCase> out;
  for (const auto &c : m)
    out.push_back({c.at("file"), json_init(c)});
  std::sort(out.begin(), out.end(),
            [](const MsCase &a, const MsCase &b) { return a.file < b.file; });
  return out;
}

struct MsResult {
  MsCase c;
  memsafe::DiffReport report;
  double ms = 0;
  std::string error;
  bool ok() const { return error.empty() && report.ok(); }
};

inline std::vector<MsResult> run_ms_suite(const std::string &dir,
                                          const std::vector<Strategy> &family) {
  std::vector<MsCase> cases = load_ms_suite(dir);
  auto one = [&](const MsCase &c) {
    MsResult r{c, {}, 0, {}};
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.report = memsafe::differential_check(memsafe::parse(read_file(dir + "/" + c.file)),
                                             c.init, family);
    } catch (const std::exception &e) {
      r.error = e.what();
    }
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  std::vector<std::future<MsResult>> jobs;
  for (const MsCase &c : cases)
    jobs.push_back(std::async(std::launch::async, one, c));
  std::vector<MsResult> out;
  for (auto &j : jobs)
    out.push_back(j.get());
  return out;
}

struct CorpusSpec {
  std::string dir;
  std::string family = kDefaultFamily;
  std::uint64_t fuel = notac::kDefaultFuel;
  bool memsafe = false; // run the Memsafe differential suite instead
  bool json = false;
  bool timings = true;  // off for byte-comparable output
};

inline int cmd_corpus(const CorpusSpec &spec, std::ostream &out) {
  std::vector<Strategy> fam = parse_family(spec.family);
  bool all = true;
  if (spec.memsafe) {
    auto results = run_ms_suite(spec.dir + "/memsafe", fam);
    nlohmann::json a = nlohmann::json::array();
    for (const MsResult &r : results) {
      all = all && r.ok();
      std::string gv = r.error.empty() && r.report.precondition
                           ? verdict_name(r.report.gai.verdict)
                           : "-";
      if (spec.json) {
        nlohmann::json j{{"file", r.c.file}, {"agree", r.ok()}, {"gai", gv}};
        if (!r.error.empty())
          j["error"] = r.error;
        j["problems"] = r.report.problems;
        a.push_back(j);
        continue;
      }
      char line[160];
      std::snprintf(line, sizeof line, "%-20s %-9s gai=%-13s", r.c.file.c_str(),
                    r.ok() ? "agree" : "DISAGREE", gv.c_str());
      out << line;
      if (spec.timings)
        out << ' ' << static_cast<long>(r.ms) << "ms";
      out << '\n';
      if (!r.error.empty())
        out << "  error: " << r.error << '\n';
      for (const std::string &p : r.report.problems)
        out << "  " << p << '\n';
    }
    if (spec.json)
      out << nlohmann::json{{"cases", a}, {"ok", all}}.dump(2) << '\n';
    else
      out << (all ? "all programs agree\n" : "some programs disagree\n");
    return all ? kExitOk : kExitFail;
  }

  auto results = run_corpus(spec.dir, fam, spec.fuel);
  nlohmann::json a = nlohmann::json::array();
  if (!spec.json) {
    char head[160];
    std::snprintf(head, sizeof head, "%-24s %-7s %-20s %s", "case", "expect", "got", "witness");
    out << head << '\n';
  }
  for (const CorpusResult &r : results) {
    all = all && r.match();
    if (spec.json) {
      nlohmann::json j{{"name", r.c.name}, {"expect", r.c.expect},
                       {"got", r.got()}, {"match", r.match()}};
      if (!r.clause.empty()) {
        j["clause"] = r.clause;
        j["witness"] = r.witness;
      }
      if (!r.error.empty())
        j["error"] = r.error;
      a.push_back(j);
      continue;
    }
    std::string got = r.got() + (r.match() ? "" : " MISMATCH");
    std::string wit = r.clause.empty() ? "" : r.clause + ": " + r.witness;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-7s %-20s %s", r.c.name.c_str(),
                  r.c.expect.c_str(), got.c_str(), wit.c_str());
    out << line;
    if (spec.timings)
      out << "  (" << static_cast<long>(r.ms) << "ms)";
    out << '\n';
    if (!r.error.empty())
      out << "  error: " << r.error << '\n';
  }
  if (spec.json)
    out << nlohmann::json{{"cases", a}, {"ok", all}}.dump(2) << '\n';
  else
    out << (all ? "all verdicts match\n" : "verdict mismatch\n");
  return all ? kExitOk : kExitFail;
}

} // namespace gai::cli
