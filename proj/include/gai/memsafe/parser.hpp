// Parser for .ms sources.
//
//   c ::= skip | x <- e | x <- [e] | [e] <- e | x <- alloc(e)
//       | if e then c else c end | while e do c end | c ; c
//   e ::= e == e | e <= e | e + e | e - e | e * e | n | -n | x | nil | (e)
#pragma once

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gai/memsafe/ast.hpp"

namespace gai::memsafe {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string &msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg) {}
};

namespace detail {

struct Tok {
  enum class Kind { Ident, Number, Punct, End } kind = Kind::End;
  std::string text;
  int line = 0, col = 0;
};

inline std::vector<Tok> lex(const std::string &src) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n')
        adv(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Kind::Ident, src.substr(i, j - i), l, cl});
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      out.push_back({Tok::Kind::Number, src.substr(i, j - i), l, cl});
      adv(j - i);
      continue;
    }
    bool done = false;
    for (const char *p : {"<-", "==", "<="})
      if (src.compare(i, 2, p) == 0) {
        out.push_back({Tok::Kind::Punct, p, l, cl});
        adv(2);
        done = true;
        break;
      }
    if (done)
      continue;
    if (std::string("()[];+-*").find(c) != std::string::npos) {
      out.push_back({Tok::Kind::Punct, std::string(1, c), l, cl});
      adv(1);
      continue;
    }
    throw ParseError(l, cl, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::Kind::End, "", line, col});
  return out;
}

inline const std::set<std::string> &keywords() {
  static const std::set<std::string> k = {"skip", "if",  "then",  "else", "end",
                                          "while", "do", "alloc", "nil"};
  return k;
}

class Parser {
public:
  explicit Parser(std::vector<Tok> t) : toks_(std::move(t)) {}

  CmdP program() {
    CmdP c = seq();
    if (peek().kind != Tok::Kind::End)
      fail("expected end of input");
    return c;
  }

private:
  const Tok &peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool is(const char *p, std::size_t k = 0) const {
    const Tok &t = peek(k);
    return (t.kind == Tok::Kind::Punct || t.kind == Tok::Kind::Ident) && t.text == p;
  }
  Tok take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  void expect(const char *p) {
    if (!is(p))
      fail(std::string("expected '") + p + "'");
    take();
  }
  [[noreturn]] void fail(const std::string &msg) const {
    const Tok &t = peek();
    throw ParseError(t.line, t.col,
                     msg + ", found " + (t.kind == Tok::Kind::End ? "end of input" : "'" + t.text + "'"));
  }

  // A sequence ends at a closing keyword or end of input; ';' separates and
  // may also trail.
  CmdP seq() {
    std::vector<CmdP> cs;
    while (true) {
      if (peek().kind == Tok::Kind::End || is("end") || is("else"))
        break;
      cs.push_back(cmd());
      if (!is(";"))
        break;
      while (is(";"))
        take();
    }
    if (cs.empty())
      return m_skip();
    CmdP c = cs.back();
    for (std::size_t i = cs.size() - 1; i-- > 0;)
      c = m_seq(cs[i], c);
    return c;
  }

  CmdP cmd() {
    if (is("skip")) {
      take();
      return m_skip();
    }
    if (is("if")) {
      take();
      ExprP e = expr();
      expect("then");
      CmdP t = seq();
      expect("else");
      CmdP f = seq();
      expect("end");
      return m_if(e, t, f);
    }
    if (is("while")) {
      take();
      ExprP e = expr();
      expect("do");
      CmdP b = seq();
      expect("end");
      return m_while(e, b);
    }
    if (is("[")) {
      take();
      ExprP a = expr();
      expect("]");
      expect("<-");
      return m_store(a, expr());
    }
    std::string x = ident();
    expect("<-");
    if (is("[")) {
      take();
      ExprP a = expr();
      expect("]");
      return m_load(x, a);
    }
    if (is("alloc")) {
      take();
      expect("(");
      ExprP n = expr();
      expect(")");
      return m_alloc(x, n);
    }
    return m_assign(x, expr());
  }

  std::string ident() {
    const Tok &t = peek();
    if (t.kind != Tok::Kind::Ident || keywords().count(t.text))
      fail("expected a variable");
    return take().text;
  }

  ExprP expr() {
    ExprP l = additive();
    while (is("==") || is("<=")) {
      Op op = is("==") ? Op::Eq : Op::Le;
      take();
      l = m_bin(op, l, additive());
    }
    return l;
  }
  ExprP additive() {
    ExprP l = term();
    while (is("+") || is("-")) {
      Op op = is("+") ? Op::Add : Op::Sub;
      take();
      l = m_bin(op, l, term());
    }
    return l;
  }
  ExprP term() {
    ExprP l = atom();
    while (is("*")) {
      take();
      l = m_bin(Op::Mul, l, atom());
    }
    return l;
  }
  ExprP atom() {
    if (peek().kind == Tok::Kind::Number)
      return m_const(Val(take().text));
    if (is("-") && peek(1).kind == Tok::Kind::Number) {
      take();
      return m_const(-Val(take().text));
    }
    if (is("nil")) {
      take();
      return m_nil();
    }
    if (is("(")) {
      take();
      ExprP e = expr();
      expect(")");
      return e;
    }
    return m_var(ident());
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline CmdP parse(const std::string &src) {
  detail::Parser p(detail::lex(src));
  return p.program();
}

} // namespace gai::memsafe
