// Memsafe evaluation: block-identifier pointers, bounds checks, zeroed
// allocation, unbounded memory.
#pragma once

#include <map>
#include <optional>
#include <string>

#include "gai/memsafe/ast.hpp"

namespace gai::memsafe {

struct Value {
  enum class Kind { Int, Nil, Ptr };
  Kind kind = Kind::Int;
  Val z;                // Int
  std::uint64_t id = 0; // Ptr
  Val bound;            // Ptr
  Val offset;           // Ptr

  static Value integer(Val v) { return Value{Kind::Int, std::move(v), 0, 0, 0}; }
  static Value nil() { return Value{Kind::Nil, 0, 0, 0, 0}; }
  static Value ptr(std::uint64_t id, Val b, Val n) {
    return Value{Kind::Ptr, 0, id, std::move(b), std::move(n)};
  }
  bool is_int() const { return kind == Kind::Int; }
  bool in_bounds() const { return kind == Kind::Ptr && offset >= 0 && offset < bound; }

  friend bool operator==(const Value &a, const Value &b) {
    if (a.kind != b.kind)
      return false;
    switch (a.kind) {
    case Kind::Int: return a.z == b.z;
    case Kind::Nil: return true;
    case Kind::Ptr: return a.id == b.id && a.bound == b.bound && a.offset == b.offset;
    }
    return false;
  }
};

inline std::string to_string(const Value &v) {
  switch (v.kind) {
  case Value::Kind::Int: return v.z.str();
  case Value::Kind::Nil: return "nil";
  case Value::Kind::Ptr:
    return "(" + std::to_string(v.id) + "," + v.bound.str() + "," + v.offset.str() + ")";
  }
  return "?";
}

// Cells never written read as 0, so a large alloc costs nothing.
struct Block {
  Val bound;
  std::map<Val, Value> cells;
};

struct State {
  std::map<std::string, Value> locals;
  std::map<std::uint64_t, Block> heap;
  std::uint64_t next_id = 1; // ids are never reused
};

struct Outcome {
  enum class Kind { Ok, Error, Diverged };
  Kind kind = Kind::Ok;
  State state;
  std::string reason; // Error
  std::uint64_t steps = 0;
};

inline const char *outcome_name(Outcome::Kind k) {
  switch (k) {
  case Outcome::Kind::Ok: return "ok";
  case Outcome::Kind::Error: return "error";
  case Outcome::Kind::Diverged: return "diverged";
  }
  return "?";
}

/// Partial: nullopt where the evaluation is undefined.
inline std::optional<Value> eval_expr(const State &s, const ExprP &e) {
  switch (e->kind) {
  case Expr::Kind::Const: return Value::integer(e->value);
  case Expr::Kind::Nil: return Value::nil();
  case Expr::Kind::Var: {
    auto it = s.locals.find(e->name);
    if (it == s.locals.end())
      return std::nullopt;
    return it->second;
  }
  case Expr::Kind::Bin: break;
  }
  auto a = eval_expr(s, e->lhs);
  auto b = eval_expr(s, e->rhs);
  if (!a || !b)
    return std::nullopt;
  using K = Value::Kind;
  switch (e->op) {
  case Op::Add:
    if (a->is_int() && b->is_int())
      return Value::integer(a->z + b->z);
    if (a->kind == K::Ptr && b->is_int())
      return Value::ptr(a->id, a->bound, a->offset + b->z);
    if (a->is_int() && b->kind == K::Ptr)
      return Value::ptr(b->id, b->bound, a->z + b->offset);
    return std::nullopt;
  case Op::Sub:
    if (a->is_int() && b->is_int())
      return Value::integer(a->z - b->z);
    if (a->kind == K::Ptr && b->is_int())
      return Value::ptr(a->id, a->bound, a->offset - b->z);
    return std::nullopt;
  case Op::Mul:
    if (a->is_int() && b->is_int())
      return Value::integer(a->z * b->z);
    return std::nullopt;
  case Op::Eq:
    if (a->is_int() && b->is_int())
      return Value::integer(a->z == b->z ? 1 : 0);
    if (a->is_int() || b->is_int())
      return std::nullopt;
    // nil or pointers; pointers must be in bounds
    if ((a->kind == K::Ptr && !a->in_bounds()) || (b->kind == K::Ptr && !b->in_bounds()))
      return std::nullopt;
    return Value::integer(*a == *b ? 1 : 0);
  case Op::Le:
    if (a->is_int() && b->is_int())
      return Value::integer(a->z <= b->z ? 1 : 0);
    return std::nullopt;
  }
  return std::nullopt;
}

namespace detail {

class Evaluator {
public:
  Evaluator(State s, std::uint64_t fuel) : s_(std::move(s)), fuel_(fuel) {}

  Outcome run(const CmdP &c) {
    Outcome o;
    Status st = exec(c);
    o.kind = st == Status::Ok ? Outcome::Kind::Ok
             : st == Status::Error ? Outcome::Kind::Error
                                   : Outcome::Kind::Diverged;
    o.reason = reason_;
    o.steps = steps_;
    o.state = std::move(s_);
    return o;
  }

private:
  enum class Status { Ok, Error, OutOfFuel };

  Status error(std::string why) {
    reason_ = std::move(why);
    return Status::Error;
  }

  // if(b, x, y): the condition must be an integer
  std::optional<bool> truth(const ExprP &e, Status &st) {
    auto v = eval_expr(s_, e);
    if (!v || !v->is_int()) {
      st = error("condition is not an integer");
      return std::nullopt;
    }
    return v->z != 0;
  }

  Status exec(const CmdP &c) {
    if (steps_ == fuel_)
      return Status::OutOfFuel;
    ++steps_;
    switch (c->kind) {
    case Cmd::Kind::Skip:
      return Status::Ok;
    case Cmd::Kind::Seq: {
      Status st = exec(c->c1);
      return st == Status::Ok ? exec(c->c2) : st;
    }
    case Cmd::Kind::If: {
      Status st = Status::Ok;
      auto b = truth(c->e1, st);
      if (!b)
        return st;
      return exec(*b ? c->c1 : c->c2);
    }
    case Cmd::Kind::While:
      while (true) {
        Status st = Status::Ok;
        auto b = truth(c->e1, st);
        if (!b)
          return st;
        if (!*b)
          return Status::Ok;
        st = exec(c->c1);
        if (st != Status::Ok)
          return st;
        if (steps_ == fuel_)
          return Status::OutOfFuel;
        ++steps_;
      }
    case Cmd::Kind::Assign: {
      auto v = eval_expr(s_, c->e1);
      if (!v)
        return error("undefined expression assigned to " + c->var);
      s_.locals[c->var] = *v;
      return Status::Ok;
    }
    case Cmd::Kind::Load: {
      auto p = eval_expr(s_, c->e1);
      if (!p || !p->in_bounds())
        return error("load through invalid pointer");
      s_.locals[c->var] = read(*p);
      return Status::Ok;
    }
    case Cmd::Kind::Store: {
      auto p = eval_expr(s_, c->e1);
      if (!p || !p->in_bounds())
        return error("store through invalid pointer");
      auto v = eval_expr(s_, c->e2);
      if (!v)
        return error("undefined value stored");
      s_.heap.at(p->id).cells[p->offset] = *v;
      return Status::Ok;
    }
    case Cmd::Kind::Alloc: {
      auto n = eval_expr(s_, c->e1);
      if (!n || !n->is_int() || n->z < 0)
        return error("alloc size is not a natural number");
      std::uint64_t id = s_.next_id++;
      s_.heap[id] = Block{n->z, {}};
      s_.locals[c->var] = Value::ptr(id, n->z, 0);
      return Status::Ok;
    }
    }
    return Status::Ok;
  }

  Value read(const Value &p) const {
    const Block &b = s_.heap.at(p.id);
    auto it = b.cells.find(p.offset);
    return it == b.cells.end() ? Value::integer(0) : it->second;
  }

  State s_;
  std::uint64_t fuel_;
  std::uint64_t steps_ = 0;
  std::string reason_;
};

} // namespace detail

inline constexpr std::uint64_t kDefaultMsFuel = 100000;

inline Outcome eval_cmd(State s, const CmdP &c, std::uint64_t fuel = kDefaultMsFuel) {
  detail::Evaluator ev(std::move(s), fuel);
  return ev.run(c);
}

inline Outcome eval_program(const CmdP &c, const std::map<std::string, Val> &init = {},
                            std::uint64_t fuel = kDefaultMsFuel) {
  State s;
  for (const auto &[x, v] : init)
    s.locals[x] = Value::integer(v);
  return eval_cmd(std::move(s), c, fuel);
}

} // namespace gai::memsafe
