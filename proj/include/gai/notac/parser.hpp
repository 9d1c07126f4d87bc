// Recursive-descent parser for .ntc sources.
#pragma once

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gai/notac/ast.hpp"

namespace gai::notac {

class ParseError : public std::runtime_error {
public:
  ParseError(Loc loc, const std::string &msg)
      : std::runtime_error(to_string(loc) + ": " + msg), loc_(loc) {}
  Loc loc() const { return loc_; }

private:
  Loc loc_;
};

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  Loc loc;
};

inline std::vector<Token> lex(const std::string &src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char *two[] = {"==", "!=", "<=", ">=", "&&", "||"};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n')
        advance(1);
      continue;
    }
    Loc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Token::Kind::Ident, src.substr(i, j - i), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      out.push_back({Token::Kind::Number, src.substr(i, j - i), loc});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char *t : two)
      if (src.compare(i, 2, t) == 0) {
        out.push_back({Token::Kind::Punct, t, loc});
        advance(2);
        matched = true;
        break;
      }
    if (matched)
      continue;
    if (std::string("(){};=<>+-*^&").find(c) != std::string::npos) {
      out.push_back({Token::Kind::Punct, std::string(1, c), loc});
      advance(1);
      continue;
    }
    throw ParseError(loc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::Kind::End, "", Loc{line, col}});
  return out;
}

inline const std::set<std::string> &keywords() {
  static const std::set<std::string> k = {"if",   "else",    "while", "malloc",
                                          "cast", "free",    "skip",  "observe",
                                          "NULL", "error"};
  return k;
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  CmdP program() {
    std::vector<CmdP> cs;
    while (peek().kind != Token::Kind::End)
      if (auto c = statement())
        cs.push_back(c);
    return c_block(cs);
  }

private:
  const Token &peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool is(const char *p, std::size_t k = 0) const {
    const Token &t = peek(k);
    return t.kind != Token::Kind::Number && t.kind != Token::Kind::End &&
           t.text == p;
  }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  Token expect(const char *p) {
    if (!is(p))
      fail(std::string("expected '") + p + "'");
    return take();
  }
  [[noreturn]] void fail(const std::string &msg) const {
    const Token &t = peek();
    std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.loc, msg + ", found " + got);
  }

  // Returns null for an empty statement.
  CmdP statement() {
    Loc loc = peek().loc;
    if (is(";")) {
      take();
      return nullptr;
    }
    if (is("skip")) {
      take();
      expect(";");
      return c_skip(loc);
    }
    if (is("free") || is("observe")) {
      bool isFree = is("free");
      take();
      expect("(");
      ExprP e = expr();
      expect(")");
      expect(";");
      return isFree ? c_free(e, loc) : c_observe(e, loc);
    }
    if (is("error")) {
      take();
      expect("(");
      expect(")");
      expect(";");
      return c_assign(lv_deref(e_const(Val(-1))), e_const(Val(0)), loc);
    }
    if (is("if")) {
      take();
      expect("(");
      ExprP e = expr();
      expect(")");
      CmdP t = block();
      CmdP f = c_skip(loc);
      if (is("else")) {
        take();
        f = block();
      }
      return c_if(e, t, f, loc);
    }
    if (is("while")) {
      take();
      expect("(");
      ExprP e = expr();
      expect(")");
      return c_while(e, block(), loc);
    }
    Lval lv = lval();
    expect("=");
    CmdP c;
    if (is("malloc") || is("cast")) {
      bool isMalloc = is("malloc");
      take();
      expect("(");
      ExprP e = expr();
      expect(")");
      c = isMalloc ? c_malloc(lv, e, loc) : c_cast(lv, e, loc);
    } else {
      c = c_assign(lv, expr(), loc);
    }
    expect(";");
    return c;
  }

  CmdP block() {
    if (!is("{")) {
      CmdP c = statement();
      return c ? c : c_skip(peek().loc);
    }
    Loc loc = take().loc;
    std::vector<CmdP> cs;
    while (!is("}")) {
      if (peek().kind == Token::Kind::End)
        fail("expected '}'");
      if (auto c = statement())
        cs.push_back(c);
    }
    take();
    return cs.empty() ? c_skip(loc) : c_block(cs);
  }

  Lval lval() {
    if (is("*")) {
      take();
      return lv_deref(unary());
    }
    return lv_var(ident());
  }

  std::string ident() {
    const Token &t = peek();
    if (t.kind != Token::Kind::Ident || keywords().count(t.text))
      fail("expected a variable");
    return take().text;
  }

  ExprP expr() { return binary(0); }

  // Precedence levels, loosest first.
  ExprP binary(int level) {
    static const std::vector<std::vector<std::pair<const char *, BinOp>>> levels = {
        {{"||", BinOp::Or}},
        {{"&&", BinOp::And}},
        {{"^", BinOp::Xor}},
        {{"==", BinOp::Eq}, {"!=", BinOp::Ne}},
        {{"<=", BinOp::Le}, {">=", BinOp::Ge}, {"<", BinOp::Lt}, {">", BinOp::Gt}},
        {{"+", BinOp::Add}, {"-", BinOp::Sub}},
        {{"*", BinOp::Mul}},
    };
    if (level == static_cast<int>(levels.size()))
      return unary();
    ExprP lhs = binary(level + 1);
    while (true) {
      bool found = false;
      for (const auto &[text, op] : levels[static_cast<std::size_t>(level)])
        if (is(text)) {
          take();
          lhs = e_bin(op, lhs, binary(level + 1));
          found = true;
          break;
        }
      if (!found)
        return lhs;
    }
  }

  ExprP unary() {
    if (is("*")) {
      take();
      return e_deref(unary());
    }
    if (is("&")) {
      take();
      return e_addr_of(ident());
    }
    if (is("-")) {
      take();
      if (peek().kind == Token::Kind::Number)
        return e_const(-Val(take().text));
      return e_bin(BinOp::Sub, e_const(Val(0)), unary());
    }
    return primary();
  }

  ExprP primary() {
    const Token &t = peek();
    if (t.kind == Token::Kind::Number)
      return e_const(Val(take().text));
    if (is("NULL")) {
      take();
      return e_null();
    }
    if (is("(")) {
      take();
      ExprP e = expr();
      expect(")");
      return e;
    }
    return e_var(ident());
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline Program parse(const std::string &src) {
  detail::Parser p(detail::lex(src));
  return make_program(p.program());
}

} // namespace gai::notac
