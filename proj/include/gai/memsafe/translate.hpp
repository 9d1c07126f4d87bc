// Memsafe to Notac translation.
//
// Every command runs under the guard `if (oom) skip; else c`. An allocation
// that returns NULL sets oom; loops carry a fresh guard variable so their
// condition is not evaluated once oom is set.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gai/memsafe/ast.hpp"
#include "gai/notac/ast.hpp"
#include "gai/notac/printer.hpp"

namespace gai::memsafe {

inline constexpr const char *kOomVar = "oom";
inline constexpr const char *kIndexVar = "tr_i";
inline constexpr const char *kGuardPrefix = "tr_g";

class TranslateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline bool is_reserved(const std::string &x) {
  return x == kOomVar || x.rfind("tr_", 0) == 0;
}

struct Translation {
  notac::Program program;
  std::vector<std::string> guards; // one per while, in source order
  bool uses_index = false;
};

inline notac::ExprP translate_expr(const ExprP &e) {
  using namespace notac;
  switch (e->kind) {
  case Expr::Kind::Var: return e_var(e->name);
  case Expr::Kind::Const: return e_const(e->value);
  case Expr::Kind::Nil: return e_null();
  case Expr::Kind::Bin: break;
  }
  BinOp op = BinOp::Add;
  switch (e->op) {
  case Op::Add: op = BinOp::Add; break;
  case Op::Sub: op = BinOp::Sub; break;
  case Op::Mul: op = BinOp::Mul; break;
  case Op::Eq: op = BinOp::Eq; break;
  case Op::Le: op = BinOp::Le; break;
  }
  return e_bin(op, translate_expr(e->lhs), translate_expr(e->rhs));
}

namespace detail {

class Translator {
public:
  Translation run(const CmdP &c) {
    for (const std::string &x : vars_of(c))
      if (is_reserved(x))
        throw TranslateError("variable '" + x + "' is reserved by the translation");
    Translation t;
    notac::CmdP body = cmd(c);
    t.program = notac::make_program(body);
    t.guards = guards_;
    t.uses_index = uses_index_;
    return t;
  }

private:
  static notac::CmdP guard(notac::CmdP c) {
    return notac::c_if(notac::e_var(kOomVar), notac::c_skip(), std::move(c));
  }

  static notac::ExprP oom_clear() {
    return notac::e_bin(notac::BinOp::Eq, notac::e_var(kOomVar), notac::e_const(0));
  }

  notac::CmdP cmd(const CmdP &c) {
    namespace n = notac;
    switch (c->kind) {
    case Cmd::Kind::Skip:
      return n::c_skip();
    case Cmd::Kind::Seq:
      return n::c_seq(cmd(c->c1), cmd(c->c2));
    case Cmd::Kind::If:
      return guard(n::c_if(translate_expr(c->e1), cmd(c->c1), cmd(c->c2)));
    case Cmd::Kind::While: {
      std::string g = kGuardPrefix + std::to_string(guards_.size() + 1);
      guards_.push_back(g);
      n::CmdP body = cmd(c->c1);
      return n::c_block({
          n::c_assign(n::lv_var(g), oom_clear()),
          n::c_while(n::e_var(g),
                  n::c_block({n::c_if(translate_expr(c->e1), body,
                                n::c_assign(n::lv_var(g), n::e_const(0))),
                           n::c_assign(n::lv_var(g), n::e_bin(n::BinOp::Mul, oom_clear(), n::e_var(g)))})),
      });
    }
    case Cmd::Kind::Assign:
      return guard(n::c_assign(n::lv_var(c->var), translate_expr(c->e1)));
    case Cmd::Kind::Load:
      return guard(n::c_assign(n::lv_var(c->var), n::e_deref(translate_expr(c->e1))));
    case Cmd::Kind::Store:
      return guard(n::c_assign(n::lv_deref(translate_expr(c->e1)), translate_expr(c->e2)));
    case Cmd::Kind::Alloc: {
      uses_index_ = true;
      n::ExprP i = n::e_var(kIndexVar);
      n::ExprP x = n::e_var(c->var);
      // Zero-fill from size-1 down to 0; starting at size would write one
      // cell past the block.
      n::CmdP dec = n::c_assign(n::lv_var(kIndexVar), n::e_bin(n::BinOp::Sub, i, n::e_const(1)));
      n::CmdP fill = n::c_block({
          dec,
          n::c_while(n::e_bin(n::BinOp::Ge, i, n::e_const(0)),
                  n::c_block({n::c_assign(n::lv_deref(n::e_bin(n::BinOp::Add, x, i)), n::e_const(0)), dec})),
      });
      return guard(n::c_block({
          n::c_assign(n::lv_var(kIndexVar), translate_expr(c->e1)),
          n::c_malloc(n::lv_var(c->var), i),
          n::c_if(n::e_bin(n::BinOp::Eq, x, n::e_null()), n::c_assign(n::lv_var(kOomVar), n::e_const(1)), fill),
      }));
    }
    }
    return n::c_skip();
  }

  std::vector<std::string> guards_;
  bool uses_index_ = false;
};

} // namespace detail

inline Translation translate(const CmdP &c) {
  detail::Translator t;
  return t.run(c);
}

/// .ntc text with a short header naming the translator variables.
inline std::string translation_text(const Translation &t) {
  std::string s = "// translated from Memsafe\n";
  s += "// oom flag: " + std::string(kOomVar) + "\n";
  if (t.uses_index)
    s += "// alloc index: " + std::string(kIndexVar) +
         " (zero-fill runs from size-1 down to 0)\n";
  for (std::size_t k = 0; k < t.guards.size(); ++k)
    s += "// loop guard " + std::to_string(k + 1) + ": " + t.guards[k] + "\n";
  return s + notac::print_program(t.program);
}

} // namespace gai::memsafe
