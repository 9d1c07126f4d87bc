// Differential validation of the translation: Memsafe evaluation against the
// translated program under each allocator, plus a GAI check of the result.
#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gai/gai.hpp"
#include "gai/memsafe/eval.hpp"
#include "gai/memsafe/translate.hpp"

namespace gai::memsafe {

struct MemberCheck {
  std::string allocator;
  notac::Status status = notac::Status::Terminated;
  Val oom;
  std::vector<std::string> mismatches;
  bool guard_breach = false; // a guarded command ran after oom was set
};

struct DiffReport {
  Outcome ms;
  Translation translation;
  bool precondition = true; // Memsafe run ended Ok from an integer-only store
  std::vector<MemberCheck> members;
  gai::GaiReport gai;
  std::vector<std::string> problems;

  bool ok() const { return precondition && problems.empty(); }
};

struct DiffOptions {
  std::uint64_t ms_fuel = kDefaultMsFuel;
  std::uint64_t notac_fuel = notac::kDefaultFuel;
  Addr base = gai::kDefaultEnvBase;
  gai::GaiOptions gai;
};

namespace detail {

inline bool allowed_after_oom(const notac::Cmd &c) {
  using K = notac::Cmd::Kind;
  switch (c.kind) {
  case K::Skip:
  case K::Seq:
  case K::If:
  case K::While:
    return true;
  case K::Assign:
    return !c.lval.deref && c.lval.name.rfind(kGuardPrefix, 0) == 0;
  default:
    return false;
  }
}

} // namespace detail

inline DiffReport differential_check(const CmdP &prog,
                                     const std::map<std::string, Val> &init,
                                     const std::vector<Strategy> &family,
                                     const DiffOptions &opt = {}) {
  DiffReport rep;
  rep.ms = eval_program(prog, init, opt.ms_fuel);
  if (rep.ms.kind != Outcome::Kind::Ok) {
    rep.precondition = false;
    rep.problems.push_back(std::string("Memsafe run ended ") +
                           outcome_name(rep.ms.kind) +
                           (rep.ms.reason.empty() ? "" : ": " + rep.ms.reason));
    return rep;
  }
  rep.translation = translate(prog);
  const notac::Program &np = rep.translation.program;

  std::map<std::string, Val> ninit;
  for (const auto &[x, v] : init)
    if (std::find(np.vars.begin(), np.vars.end(), x) != np.vars.end())
      ninit[x] = v;
  gai::GaiInput in = gai::make_input(np, opt.base, ninit, opt.notac_fuel);
  auto oom_addr = in.env.find(kOomVar);

  for (const Strategy &alpha : family) {
    MemberCheck mc;
    mc.allocator = alpha.spec();
    auto observer = [&](const notac::Cmd &c, const Heap &h) {
      if (oom_addr == in.env.end() || mc.guard_breach)
        return;
      const Val *o = h.find(oom_addr->second);
      if (o && *o != 0 && !detail::allowed_after_oom(c))
        mc.guard_breach = true;
    };
    notac::Outcome out = notac::run(in.env, alpha, np, in.h0, in.fuel, observer);
    mc.status = out.status;
    if (oom_addr != in.env.end())
      if (const Val *o = out.heap.find(oom_addr->second))
        mc.oom = *o;
    if (out.status != notac::Status::Terminated)
      rep.problems.push_back(mc.allocator + ": translated run " +
                             notac::status_name(out.status) +
                             (out.reason.empty() ? "" : " (" + out.reason + ")"));
    if (mc.guard_breach)
      rep.problems.push_back(mc.allocator + ": command executed after oom was set");
    if (out.status == notac::Status::Terminated && mc.oom == 0) {
      for (const auto &[x, v] : rep.ms.state.locals) {
        if (!v.is_int())
          continue;
        auto it = in.env.find(x);
        const Val *cell = it == in.env.end() ? nullptr : out.heap.find(it->second);
        if (!cell || *cell != v.z) {
          mc.mismatches.push_back(x + ": memsafe " + v.z.str() + ", notac " +
                                  (cell ? cell->str() : std::string("inaccessible")));
        }
      }
      for (const std::string &m : mc.mismatches)
        rep.problems.push_back(mc.allocator + ": " + m);
    }
    rep.members.push_back(std::move(mc));
  }

  rep.gai = gai::gai_check(in, family, opt.gai);
  if (rep.gai.verdict != gai::Verdict::Pass)
    rep.problems.push_back(std::string("gai check: ") + gai::verdict_name(rep.gai.verdict));
  return rep;
}

inline std::string format_diff(const DiffReport &r) {
  std::ostringstream os;
  os << "memsafe: " << outcome_name(r.ms.kind);
  if (r.ms.kind == Outcome::Kind::Ok) {
    os << " {";
    bool first = true;
    for (const auto &[x, v] : r.ms.state.locals) {
      os << (first ? "" : ", ") << x << "=" << to_string(v);
      first = false;
    }
    os << "}";
  }
  os << '\n';
  for (const MemberCheck &m : r.members)
    os << "  " << m.allocator << ": " << notac::status_name(m.status)
       << " oom=" << m.oom << (m.mismatches.empty() ? "" : " MISMATCH") << '\n';
  if (r.precondition)
    os << "gai: " << gai::verdict_name(r.gai.verdict) << '\n';
  for (const std::string &p : r.problems)
    os << "problem: " << p << '\n';
  os << (r.ok() ? "agree\n" : "disagree\n");
  return os.str();
}

} // namespace gai::memsafe
