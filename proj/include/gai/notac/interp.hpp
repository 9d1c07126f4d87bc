// Small-step interpreter for Notac.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gai/alloc_model.hpp"
#include "gai/notac/ast.hpp"

namespace gai::notac {

using Env = std::map<std::string, Addr>;

struct EnvSetup {
  Env env;
  Heap heap;
  AddrSet reserved;
};

/// Consecutive addresses from `base` in first-occurrence order, each cell
/// seeded with 0 unless overridden by `init`.
inline EnvSetup make_env(const Program &p, Addr base,
                         const std::map<std::string, Val> &init = {}) {
  EnvSetup s;
  Addr a = base;
  for (const std::string &x : p.vars) {
    s.env[x] = a;
    auto it = init.find(x);
    s.heap.define(a, it == init.end() ? Val(0) : it->second);
    s.reserved.insert(a);
    ++a;
  }
  for (const auto &[x, v] : init)
    if (!s.env.count(x))
      throw std::invalid_argument("initial value for unknown variable '" + x + "'");
  return s;
}

inline bool compatible(const Env &env, const Heap &h) {
  for (const auto &[x, a] : env)
    if (!h.defined(a))
      return false;
  return true;
}

enum class Status { Terminated, Stuck, OutOfFuel };

inline const char *status_name(Status s) {
  switch (s) {
  case Status::Terminated: return "terminated";
  case Status::Stuck: return "stuck";
  case Status::OutOfFuel: return "out-of-fuel";
  }
  return "?";
}

struct Outcome {
  Status status = Status::Terminated;
  Trace trace;
  Heap heap;
  AnyState state;
  std::string reason; // Stuck only
  Loc loc;            // Stuck only
  std::uint64_t steps = 0;
};

/// Called before each command is executed.
using StepObserver = std::function<void(const Cmd &, const Heap &)>;

/// A configuration: remaining commands as a stack, heap and allocator state.
class Machine {
public:
  enum class StepResult { Continue, Done, Stuck };

  Machine(const Env &env, const Strategy &alpha, const Program &p, Heap h0)
      : env_(env), alpha_(alpha), heap_(std::move(h0)) {
    if (!compatible(env_, heap_))
      throw std::invalid_argument("environment not compatible with heap");
    state_ = alpha_.init(heap_);
    stack_.push_back(p.body);
  }

  void set_observer(StepObserver obs) { observer_ = std::move(obs); }

  /// One small step. On Continue, `ev` receives the event emitted, if any.
  StepResult step(std::optional<Event> &ev) {
    ev.reset();
    if (stack_.empty())
      return StepResult::Done;
    CmdP c = stack_.back();
    stack_.pop_back();
    if (observer_)
      observer_(*c, heap_);
    switch (c->kind) {
    case Cmd::Kind::Skip:
      return StepResult::Continue;
    case Cmd::Kind::Seq:
      stack_.push_back(c->second);
      stack_.push_back(c->first);
      return StepResult::Continue;
    case Cmd::Kind::If: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      stack_.push_back(*v != 0 ? c->first : c->second);
      return StepResult::Continue;
    }
    case Cmd::Kind::While: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      if (*v != 0) {
        stack_.push_back(c);
        stack_.push_back(c->first);
      }
      return StepResult::Continue;
    }
    case Cmd::Kind::Observe: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      ev = Event::obs(*v);
      return StepResult::Continue;
    }
    case Cmd::Kind::Assign: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      if (!write(c->lval, *v))
        return stuck(*c);
      return StepResult::Continue;
    }
    case Cmd::Kind::Cast: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      if (!write(c->lval, *v))
        return stuck(*c);
      ev = Event::cast(*v);
      return StepResult::Continue;
    }
    case Cmd::Kind::Malloc: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      auto n = to_size(*v);
      if (!n) {
        reason_ = "malloc size " + v->str() + " is not a size";
        return stuck(*c);
      }
      Addr a = alpha_.malloc(heap_, state_, *n);
      // The lval is resolved against the post-malloc heap.
      if (!write(c->lval, Val(a)))
        return stuck(*c);
      ev = a == alpha_.null() ? Event::mfail(*n) : Event::malloc(*n, a);
      return StepResult::Continue;
    }
    case Cmd::Kind::Free: {
      auto v = eval(c->expr);
      if (!v)
        return stuck(*c);
      auto a = to_addr(*v);
      if (!a) {
        reason_ = "free of non-address " + v->str();
        return stuck(*c);
      }
      alpha_.free(heap_, state_, *a);
      ev = Event::free(*a);
      return StepResult::Continue;
    }
    }
    return StepResult::Continue;
  }

  std::optional<Val> eval(const ExprP &e) {
    switch (e->kind) {
    case Expr::Kind::Const:
      return e->value;
    case Expr::Kind::Null:
      return Val(alpha_.null());
    case Expr::Kind::Var: {
      auto a = var_addr(e->name);
      if (!a)
        return std::nullopt;
      const Val *v = heap_.find(*a);
      if (!v) {
        reason_ = "read of inaccessible variable '" + e->name + "'";
        return std::nullopt;
      }
      return *v;
    }
    case Expr::Kind::AddrOf: {
      auto a = var_addr(e->name);
      if (!a)
        return std::nullopt;
      return Val(*a);
    }
    case Expr::Kind::Deref: {
      auto p = eval(e->lhs);
      if (!p)
        return std::nullopt;
      auto a = to_addr(*p);
      const Val *v = a ? heap_.find(*a) : nullptr;
      if (!v) {
        reason_ = "read of inaccessible address " + p->str();
        return std::nullopt;
      }
      return *v;
    }
    case Expr::Kind::Bin: {
      // Both operands are evaluated; && and || do not short-circuit.
      auto l = eval(e->lhs);
      if (!l)
        return std::nullopt;
      auto r = eval(e->rhs);
      if (!r)
        return std::nullopt;
      return binop(e->op, *l, *r);
    }
    }
    return std::nullopt;
  }

  const Heap &heap() const { return heap_; }
  const AnyState &state() const { return state_; }
  const std::string &reason() const { return reason_; }
  Loc stuck_loc() const { return stuck_loc_; }
  bool done() const { return stack_.empty(); }
  Outcome take_outcome(Status s, Trace trace, std::uint64_t steps) {
    return Outcome{s, std::move(trace), std::move(heap_), std::move(state_),
                   s == Status::Stuck ? reason_ : std::string(),
                   s == Status::Stuck ? stuck_loc_ : Loc{}, steps};
  }

private:
  std::optional<Addr> var_addr(const std::string &x) {
    auto it = env_.find(x);
    if (it == env_.end()) {
      reason_ = "unbound variable '" + x + "'";
      return std::nullopt;
    }
    return it->second;
  }

  std::optional<Val> binop(BinOp op, const Val &l, const Val &r) {
    auto b = [](bool x) { return Val(x ? 1 : 0); };
    switch (op) {
    case BinOp::Add: return l + r;
    case BinOp::Sub: return l - r;
    case BinOp::Mul: return l * r;
    case BinOp::Eq: return b(l == r);
    case BinOp::Ne: return b(l != r);
    case BinOp::Lt: return b(l < r);
    case BinOp::Le: return b(l <= r);
    case BinOp::Gt: return b(l > r);
    case BinOp::Ge: return b(l >= r);
    case BinOp::And: return b(l != 0 && r != 0);
    case BinOp::Or: return b(l != 0 || r != 0);
    case BinOp::Xor:
      if (l < 0 || r < 0) {
        reason_ = "xor of negative operand";
        return std::nullopt;
      }
      return Val(l ^ r);
    }
    return std::nullopt;
  }

  bool write(const Lval &lv, const Val &v) {
    std::optional<Addr> a;
    if (lv.deref) {
      auto p = eval(lv.addr);
      if (!p)
        return false;
      a = to_addr(*p);
      if (!a) {
        reason_ = "write to inaccessible address " + p->str();
        return false;
      }
    } else {
      a = var_addr(lv.name);
      if (!a)
        return false;
    }
    if (!heap_.assign(*a, v)) {
      reason_ = "write to inaccessible address " + std::to_string(*a);
      return false;
    }
    return true;
  }

  StepResult stuck(const Cmd &c) {
    stuck_loc_ = c.loc;
    if (reason_.empty())
      reason_ = "stuck";
    return StepResult::Stuck;
  }

  Env env_;
  Strategy alpha_;
  Heap heap_;
  AnyState state_;
  std::vector<CmdP> stack_;
  StepObserver observer_;
  std::string reason_;
  Loc stuck_loc_;
};

inline constexpr std::uint64_t kDefaultFuel = 100000;

/// Initializes the allocator on h0 and steps until done, stuck or out of
/// fuel. The trace collected so far is returned in every case.
inline Outcome run(const Env &env, const Strategy &alpha, const Program &p,
                   const Heap &h0, std::uint64_t fuel = kDefaultFuel,
                   StepObserver observer = {}) {
  Machine m(env, alpha, p, h0);
  if (observer)
    m.set_observer(std::move(observer));
  Trace trace;
  std::uint64_t steps = 0;
  std::optional<Event> ev;
  while (true) {
    if (m.done())
      return m.take_outcome(Status::Terminated, std::move(trace), steps);
    if (steps == fuel)
      return m.take_outcome(Status::OutOfFuel, std::move(trace), steps);
    auto r = m.step(ev);
    ++steps;
    if (r == Machine::StepResult::Stuck)
      return m.take_outcome(Status::Stuck, std::move(trace), steps);
    if (ev)
      trace.push_back(std::move(*ev));
  }
}

} // namespace gai::notac
