// Notac abstract syntax, events and traces.
#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "gai/core.hpp"

namespace gai::notac {

struct Loc {
  int line = 0;
  int col = 0;
};

inline std::string to_string(Loc l) {
  return std::to_string(l.line) + ":" + std::to_string(l.col);
}

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, Xor, And, Or };

inline const char *op_text(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Eq: return "==";
  case BinOp::Ne: return "!=";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::Xor: return "^";
  case BinOp::And: return "&&";
  case BinOp::Or: return "||";
  }
  return "?";
}

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Const, Var, Null, AddrOf, Deref, Bin };
  Kind kind = Kind::Const;
  Val value;        // Const
  std::string name; // Var, AddrOf
  BinOp op = BinOp::Add;
  ExprP lhs; // Deref operand, Bin lhs
  ExprP rhs;
};

inline ExprP e_const(Val v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Const;
  e->value = std::move(v);
  return e;
}
inline ExprP e_var(std::string x) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(x);
  return e;
}
inline ExprP e_null() {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Null;
  return e;
}
inline ExprP e_addr_of(std::string x) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::AddrOf;
  e->name = std::move(x);
  return e;
}
inline ExprP e_deref(ExprP p) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Deref;
  e->lhs = std::move(p);
  return e;
}
inline ExprP e_bin(BinOp op, ExprP l, ExprP r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bin;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

/// `x` or `*(e)`.
struct Lval {
  bool deref = false;
  std::string name;
  ExprP addr;
};

inline Lval lv_var(std::string x) { return Lval{false, std::move(x), nullptr}; }
inline Lval lv_deref(ExprP e) { return Lval{true, {}, std::move(e)}; }

struct Cmd;
using CmdP = std::shared_ptr<const Cmd>;

struct Cmd {
  enum class Kind { Assign, Cast, Malloc, Free, Skip, Seq, If, While, Observe };
  Kind kind = Kind::Skip;
  Lval lval;   // Assign, Cast, Malloc
  ExprP expr;  // rhs, cast/malloc/free/observe argument, if/while condition
  CmdP first;  // Seq first, If then-branch, While body
  CmdP second; // Seq second, If else-branch
  Loc loc;
};

namespace detail {
inline std::shared_ptr<Cmd> mk(Cmd::Kind k, Loc loc) {
  auto c = std::make_shared<Cmd>();
  c->kind = k;
  c->loc = loc;
  return c;
}
} // namespace detail

inline CmdP c_skip(Loc loc = {}) { return detail::mk(Cmd::Kind::Skip, loc); }
inline CmdP c_assign(Lval lv, ExprP e, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Assign, loc);
  c->lval = std::move(lv);
  c->expr = std::move(e);
  return c;
}
inline CmdP c_cast(Lval lv, ExprP e, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Cast, loc);
  c->lval = std::move(lv);
  c->expr = std::move(e);
  return c;
}
inline CmdP c_malloc(Lval lv, ExprP e, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Malloc, loc);
  c->lval = std::move(lv);
  c->expr = std::move(e);
  return c;
}
inline CmdP c_free(ExprP e, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Free, loc);
  c->expr = std::move(e);
  return c;
}
inline CmdP c_observe(ExprP e, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Observe, loc);
  c->expr = std::move(e);
  return c;
}
inline CmdP c_seq(CmdP a, CmdP b, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::Seq, loc);
  c->first = std::move(a);
  c->second = std::move(b);
  return c;
}
inline CmdP c_if(ExprP e, CmdP t, CmdP f, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::If, loc);
  c->expr = std::move(e);
  c->first = std::move(t);
  c->second = std::move(f);
  return c;
}
inline CmdP c_while(ExprP e, CmdP body, Loc loc = {}) {
  auto c = detail::mk(Cmd::Kind::While, loc);
  c->expr = std::move(e);
  c->first = std::move(body);
  return c;
}

/// Right-nested sequence of the given commands; skip when empty.
inline CmdP c_block(const std::vector<CmdP> &cs) {
  if (cs.empty())
    return c_skip();
  CmdP out = cs.back();
  for (std::size_t i = cs.size() - 1; i-- > 0;)
    out = c_seq(cs[i], out, cs[i]->loc);
  return out;
}

struct Program {
  CmdP body;
  std::vector<std::string> vars; // first-occurrence order
};

namespace detail {
inline void note_var(std::vector<std::string> &vars, const std::string &x) {
  for (const auto &v : vars)
    if (v == x)
      return;
  vars.push_back(x);
}
inline void collect(const ExprP &e, std::vector<std::string> &vars) {
  if (!e)
    return;
  if (e->kind == Expr::Kind::Var || e->kind == Expr::Kind::AddrOf)
    note_var(vars, e->name);
  collect(e->lhs, vars);
  collect(e->rhs, vars);
}
inline void collect(const CmdP &c, std::vector<std::string> &vars) {
  if (!c)
    return;
  switch (c->kind) {
  case Cmd::Kind::Assign:
  case Cmd::Kind::Cast:
  case Cmd::Kind::Malloc:
    if (c->lval.deref)
      collect(c->lval.addr, vars);
    else
      note_var(vars, c->lval.name);
    collect(c->expr, vars);
    break;
  default:
    collect(c->expr, vars);
    break;
  }
  collect(c->first, vars);
  collect(c->second, vars);
}
} // namespace detail

/// Variables of `c` in order of first occurrence (left to right).
inline std::vector<std::string> program_vars(const CmdP &c) {
  std::vector<std::string> vars;
  detail::collect(c, vars);
  return vars;
}

inline Program make_program(CmdP body) {
  Program p;
  p.vars = program_vars(body);
  p.body = std::move(body);
  return p;
}

// ---------------------------------------------------------------------------
// Events

struct Event {
  enum class Kind { Obs, Malloc, MFail, Free, Cast };
  Kind kind = Kind::Obs;
  Val val;    // Obs, Cast
  Size n = 0; // Malloc, MFail
  Addr a = 0; // Malloc, Free

  static Event obs(Val v) { return {Kind::Obs, std::move(v), 0, 0}; }
  static Event cast(Val v) { return {Kind::Cast, std::move(v), 0, 0}; }
  static Event malloc(Size n, Addr a) { return {Kind::Malloc, Val(0), n, a}; }
  static Event mfail(Size n) { return {Kind::MFail, Val(0), n, 0}; }
  static Event free(Addr a) { return {Kind::Free, Val(0), 0, a}; }

  bool is_alloc() const { return kind == Kind::Malloc || kind == Kind::MFail; }

  friend bool operator==(const Event &x, const Event &y) {
    if (x.kind != y.kind)
      return false;
    switch (x.kind) {
    case Kind::Obs:
    case Kind::Cast:
      return x.val == y.val;
    case Kind::Malloc:
      return x.n == y.n && x.a == y.a;
    case Kind::MFail:
      return x.n == y.n;
    case Kind::Free:
      return x.a == y.a;
    }
    return false;
  }
};

using Trace = std::vector<Event>;

inline std::string to_string(const Event &e) {
  switch (e.kind) {
  case Event::Kind::Obs: return "obs(" + e.val.str() + ")";
  case Event::Kind::Cast: return "cast(" + e.val.str() + ")";
  case Event::Kind::Malloc:
    return "malloc(" + std::to_string(e.n) + "," + std::to_string(e.a) + ")";
  case Event::Kind::MFail: return "mfail(" + std::to_string(e.n) + ")";
  case Event::Kind::Free: return "free(" + std::to_string(e.a) + ")";
  }
  return "?";
}

inline std::string to_string(const Trace &t) {
  if (t.empty())
    return "eps";
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i)
      s += " . ";
    s += to_string(t[i]);
  }
  return s;
}

inline std::ostream &operator<<(std::ostream &os, const Event &e) {
  return os << to_string(e);
}

} // namespace gai::notac
