// Memsafe abstract syntax.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gai/core.hpp"

namespace gai::memsafe {

enum class Op { Add, Sub, Mul, Eq, Le };

inline const char *op_text(Op op) {
  switch (op) {
  case Op::Add: return "+";
  case Op::Sub: return "-";
  case Op::Mul: return "*";
  case Op::Eq: return "==";
  case Op::Le: return "<=";
  }
  return "?";
}

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Const, Nil, Bin };
  Kind kind = Kind::Const;
  std::string name;
  Val value;
  Op op = Op::Add;
  ExprP lhs, rhs;
};

inline ExprP m_var(std::string x) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(x);
  return e;
}
inline ExprP m_const(Val v) {
  auto e = std::make_shared<Expr>();
  e->value = std::move(v);
  return e;
}
inline ExprP m_nil() {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Nil;
  return e;
}
inline ExprP m_bin(Op op, ExprP l, ExprP r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bin;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

struct Cmd;
using CmdP = std::shared_ptr<const Cmd>;

struct Cmd {
  enum class Kind { Skip, Seq, If, While, Assign, Load, Store, Alloc };
  Kind kind = Kind::Skip;
  std::string var; // Assign, Load, Alloc
  ExprP e1;        // condition, rhs, address, size
  ExprP e2;        // Store value
  CmdP c1, c2;
};

namespace detail {
inline std::shared_ptr<Cmd> mk(Cmd::Kind k) {
  auto c = std::make_shared<Cmd>();
  c->kind = k;
  return c;
}
} // namespace detail

inline CmdP m_skip() { return detail::mk(Cmd::Kind::Skip); }
inline CmdP m_seq(CmdP a, CmdP b) {
  auto c = detail::mk(Cmd::Kind::Seq);
  c->c1 = std::move(a);
  c->c2 = std::move(b);
  return c;
}
inline CmdP m_if(ExprP e, CmdP t, CmdP f) {
  auto c = detail::mk(Cmd::Kind::If);
  c->e1 = std::move(e);
  c->c1 = std::move(t);
  c->c2 = std::move(f);
  return c;
}
inline CmdP m_while(ExprP e, CmdP body) {
  auto c = detail::mk(Cmd::Kind::While);
  c->e1 = std::move(e);
  c->c1 = std::move(body);
  return c;
}
inline CmdP m_assign(std::string x, ExprP e) {
  auto c = detail::mk(Cmd::Kind::Assign);
  c->var = std::move(x);
  c->e1 = std::move(e);
  return c;
}
inline CmdP m_load(std::string x, ExprP e) {
  auto c = detail::mk(Cmd::Kind::Load);
  c->var = std::move(x);
  c->e1 = std::move(e);
  return c;
}
inline CmdP m_store(ExprP addr, ExprP v) {
  auto c = detail::mk(Cmd::Kind::Store);
  c->e1 = std::move(addr);
  c->e2 = std::move(v);
  return c;
}
inline CmdP m_alloc(std::string x, ExprP n) {
  auto c = detail::mk(Cmd::Kind::Alloc);
  c->var = std::move(x);
  c->e1 = std::move(n);
  return c;
}

/// Variables in first-occurrence order.
inline void collect_vars(const ExprP &e, std::vector<std::string> &out) {
  if (!e)
    return;
  if (e->kind == Expr::Kind::Var) {
    for (const auto &x : out)
      if (x == e->name)
        return;
    out.push_back(e->name);
  }
  collect_vars(e->lhs, out);
  collect_vars(e->rhs, out);
}

inline void collect_vars(const CmdP &c, std::vector<std::string> &out) {
  if (!c)
    return;
  if (!c->var.empty()) {
    bool seen = false;
    for (const auto &x : out)
      seen = seen || x == c->var;
    if (!seen)
      out.push_back(c->var);
  }
  collect_vars(c->e1, out);
  collect_vars(c->e2, out);
  collect_vars(c->c1, out);
  collect_vars(c->c2, out);
}

inline std::vector<std::string> vars_of(const CmdP &c) {
  std::vector<std::string> out;
  collect_vars(c, out);
  return out;
}

} // namespace gai::memsafe
