// Pretty-printer producing text the parser accepts.
#pragma once

#include <sstream>
#include <string>

#include "gai/notac/ast.hpp"

namespace gai::notac {

inline std::string print_expr(const ExprP &e) {
  switch (e->kind) {
  case Expr::Kind::Const: return e->value.str();
  case Expr::Kind::Var: return e->name;
  case Expr::Kind::Null: return "NULL";
  case Expr::Kind::AddrOf: return "&" + e->name;
  case Expr::Kind::Deref: return "*(" + print_expr(e->lhs) + ")";
  case Expr::Kind::Bin:
    return "(" + print_expr(e->lhs) + " " + op_text(e->op) + " " +
           print_expr(e->rhs) + ")";
  }
  return "?";
}

inline std::string print_lval(const Lval &lv) {
  return lv.deref ? "*(" + print_expr(lv.addr) + ")" : lv.name;
}

namespace detail {

inline void print_cmd(std::ostringstream &os, const CmdP &c, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (c->kind) {
  case Cmd::Kind::Skip:
    os << pad << "skip;\n";
    break;
  case Cmd::Kind::Assign:
    os << pad << print_lval(c->lval) << " = " << print_expr(c->expr) << ";\n";
    break;
  case Cmd::Kind::Cast:
    os << pad << print_lval(c->lval) << " = cast(" << print_expr(c->expr) << ");\n";
    break;
  case Cmd::Kind::Malloc:
    os << pad << print_lval(c->lval) << " = malloc(" << print_expr(c->expr) << ");\n";
    break;
  case Cmd::Kind::Free:
    os << pad << "free(" << print_expr(c->expr) << ");\n";
    break;
  case Cmd::Kind::Observe:
    os << pad << "observe(" << print_expr(c->expr) << ");\n";
    break;
  case Cmd::Kind::Seq:
    print_cmd(os, c->first, indent);
    print_cmd(os, c->second, indent);
    break;
  case Cmd::Kind::If:
    os << pad << "if (" << print_expr(c->expr) << ") {\n";
    print_cmd(os, c->first, indent + 1);
    os << pad << "} else {\n";
    print_cmd(os, c->second, indent + 1);
    os << pad << "}\n";
    break;
  case Cmd::Kind::While:
    os << pad << "while (" << print_expr(c->expr) << ") {\n";
    print_cmd(os, c->first, indent + 1);
    os << pad << "}\n";
    break;
  }
}

} // namespace detail

inline std::string print_cmd(const CmdP &c) {
  std::ostringstream os;
  detail::print_cmd(os, c, 0);
  return os.str();
}

inline std::string print_program(const Program &p) { return print_cmd(p.body); }

} // namespace gai::notac
