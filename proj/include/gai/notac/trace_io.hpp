// Line-delimited JSON trace files, one event per line.
//
// Integers of any size are written as bare JSON numbers; reading goes
// through a SAX handler so that large values keep their exact digits.
#pragma once

#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gai/notac/ast.hpp"

namespace gai::notac {

class TraceFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string event_json(const Event &e) {
  switch (e.kind) {
  case Event::Kind::Obs:
    return R"({"kind":"obs","val":)" + e.val.str() + "}";
  case Event::Kind::Cast:
    return R"({"kind":"cast","val":)" + e.val.str() + "}";
  case Event::Kind::Malloc:
    return R"({"kind":"malloc","size":)" + std::to_string(e.n) +
           R"(,"addr":)" + std::to_string(e.a) + "}";
  case Event::Kind::MFail:
    return R"({"kind":"mfail","size":)" + std::to_string(e.n) + "}";
  case Event::Kind::Free:
    return R"({"kind":"free","addr":)" + std::to_string(e.a) + "}";
  }
  return "{}";
}

inline void write_trace(std::ostream &os, const Trace &t) {
  for (const Event &e : t)
    os << event_json(e) << '\n';
}

inline std::string trace_to_text(const Trace &t) {
  std::ostringstream os;
  write_trace(os, t);
  return os.str();
}

namespace detail {

// Collects a flat object of string and integer fields. Numbers are kept as
// their literal text.
class FlatObjectSax : public nlohmann::json_sax<nlohmann::json> {
public:
  std::map<std::string, std::string> strings;
  std::map<std::string, std::string> numbers;
  std::string error;

  bool null() override { return bad("null value"); }
  bool boolean(bool) override { return bad("boolean value"); }
  bool number_integer(number_integer_t v) override {
    return num(std::to_string(v));
  }
  bool number_unsigned(number_unsigned_t v) override {
    return num(std::to_string(v));
  }
  bool number_float(number_float_t, const string_t &s) override {
    if (s.find_first_of(".eE") != std::string::npos)
      return bad("non-integer number " + s);
    return num(s);
  }
  bool string(string_t &v) override {
    if (depth_ != 1)
      return bad("nested value");
    strings[key_] = v;
    return true;
  }
  bool binary(binary_t &) override { return bad("binary value"); }
  bool start_object(std::size_t) override {
    if (++depth_ != 1)
      return bad("nested object");
    return true;
  }
  bool key(string_t &k) override {
    key_ = k;
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override { return bad("array"); }
  bool end_array() override { return true; }
  bool parse_error(std::size_t pos, const std::string &, const nlohmann::detail::exception &ex) override {
    error = "malformed JSON at byte " + std::to_string(pos) + ": " + ex.what();
    return false;
  }

private:
  bool num(const std::string &s) {
    if (depth_ != 1)
      return bad("nested value");
    numbers[key_] = s;
    return true;
  }
  bool bad(const std::string &what) {
    error = "unexpected " + what;
    return false;
  }
  int depth_ = 0;
  std::string key_;
};

} // namespace detail

inline Event parse_event_line(const std::string &line) {
  detail::FlatObjectSax sax;
  bool ok = nlohmann::json::sax_parse(line, &sax);
  if (!ok)
    throw TraceFormatError(sax.error.empty() ? "malformed event" : sax.error);
  auto field = [&](const char *k) -> const std::string & {
    auto it = sax.numbers.find(k);
    if (it == sax.numbers.end())
      throw TraceFormatError(std::string("missing numeric field '") + k + "'");
    return it->second;
  };
  auto unsigned_field = [&](const char *k) -> std::uint64_t {
    const std::string &s = field(k);
    Val v(s);
    Val limit = std::string(k) == "addr" ? Val(kHeapMax) : Val(std::numeric_limits<std::uint64_t>::max());
    if (v < 0 || v > limit)
      throw TraceFormatError(std::string("field '") + k + "' out of range: " + s);
    return static_cast<std::uint64_t>(v);
  };
  auto it = sax.strings.find("kind");
  if (it == sax.strings.end())
    throw TraceFormatError("missing field 'kind'");
  const std::string &kind = it->second;
  if (kind == "obs")
    return Event::obs(Val(field("val")));
  if (kind == "cast")
    return Event::cast(Val(field("val")));
  if (kind == "malloc")
    return Event::malloc(unsigned_field("size"), unsigned_field("addr"));
  if (kind == "mfail")
    return Event::mfail(unsigned_field("size"));
  if (kind == "free")
    return Event::free(unsigned_field("addr"));
  throw TraceFormatError("unknown event kind '" + kind + "'");
}

/// Blank lines are skipped. Errors carry the 1-based line number.
inline Trace read_trace(std::istream &is) {
  Trace t;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      t.push_back(parse_event_line(line));
    } catch (const TraceFormatError &e) {
      throw TraceFormatError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return t;
}

inline Trace trace_from_text(const std::string &s) {
  std::istringstream is(s);
  return read_trace(is);
}

} // namespace gai::notac
