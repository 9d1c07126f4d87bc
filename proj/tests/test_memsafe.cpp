#include <gtest/gtest.h>

#include "gai/allocators.hpp"
#include "gai/cli/commands.hpp"
#include "gai/memsafe/differential.hpp"
#include "gai/memsafe/eval.hpp"
#include "gai/memsafe/parser.hpp"
#include "gai/memsafe/translate.hpp"
#include "gai/notac/parser.hpp"
#include "gai/notac/printer.hpp"
#include "support.hpp"

using namespace gai;
using namespace gai::memsafe;

namespace {

State with(std::map<std::string, Value> locals) {
  State s;
  s.locals = std::move(locals);
  return s;
}

std::optional<Value> ev(const State &s, const std::string &expr) {
  // parse "r <- expr" and evaluate its right-hand side
  CmdP c = parse("r <- " + expr);
  return eval_expr(s, c->e1);
}

Val local(const Outcome &o, const std::string &x) {
  const Value &v = o.state.locals.at(x);
  EXPECT_TRUE(v.is_int()) << x;
  return v.z;
}

DiffOptions quick() {
  DiffOptions o;
  o.gai.check_precondition = false;
  return o;
}

} // namespace

TEST(MsExpr, Examples) {
  State s = with({{"p", Value::ptr(1, 4, 1)}, {"q", Value::ptr(1, 4, 4)},
                  {"r2", Value::ptr(2, 4, 1)}, {"n", Value::integer(5)}});
  EXPECT_EQ(ev(s, "nil == nil"), Value::integer(1));
  EXPECT_EQ(ev(s, "p + 2"), Value::ptr(1, 4, 3));
  EXPECT_EQ(ev(s, "2 + p"), Value::ptr(1, 4, 3));
  EXPECT_EQ(ev(s, "p - 1"), Value::ptr(1, 4, 0));
  EXPECT_FALSE(ev(s, "q == nil")); // one past the end
  EXPECT_EQ(ev(s, "p == nil"), Value::integer(0));
  EXPECT_EQ(ev(s, "p == r2"), Value::integer(0));
  EXPECT_EQ(ev(s, "p == p"), Value::integer(1));
  EXPECT_FALSE(ev(s, "p == 1"));
  EXPECT_FALSE(ev(s, "p * 2"));
  EXPECT_FALSE(ev(s, "p <= p"));
  EXPECT_FALSE(ev(s, "nil + 1"));
  EXPECT_FALSE(ev(s, "undefined_var"));
  EXPECT_EQ(ev(s, "n * n - 1"), Value::integer(24));
  EXPECT_EQ(ev(s, "n <= 4"), Value::integer(0));
}

TEST(MsCmd, Examples) {
  Outcome a = eval_program(parse("p <- alloc(3); x <- [p + 2]"));
  ASSERT_EQ(a.kind, Outcome::Kind::Ok);
  EXPECT_EQ(local(a, "x"), Val(0));

  Outcome st = eval_program(parse("p <- alloc(3); [p + 3] <- 1"));
  EXPECT_EQ(st.kind, Outcome::Kind::Error);
  EXPECT_EQ(eval_program(parse("p <- alloc(3); x <- [p - 1]")).kind, Outcome::Kind::Error);
  EXPECT_EQ(eval_program(parse("p <- alloc(0 - 1)")).kind, Outcome::Kind::Error);
  EXPECT_EQ(eval_program(parse("if nil then skip else skip end")).kind, Outcome::Kind::Error);

  Outcome w = eval_program(parse("while 1 do skip end"), {}, 1000);
  EXPECT_EQ(w.kind, Outcome::Kind::Diverged);

  Outcome loop = eval_program(parse("i <- 0; s <- 0; while i <= 4 do s <- s + i; i <- i + 1 end"));
  ASSERT_EQ(loop.kind, Outcome::Kind::Ok);
  EXPECT_EQ(local(loop, "s"), Val(10));

  Outcome mem = eval_program(parse("p <- alloc(2); [p] <- 7; [p + 1] <- p; q <- [p + 1]; x <- [q]"));
  ASSERT_EQ(mem.kind, Outcome::Kind::Ok);
  EXPECT_EQ(local(mem, "x"), Val(7));
  EXPECT_EQ(mem.state.locals.at("q"), Value::ptr(1, 2, 0));

  EXPECT_THROW(parse("x <- [p] + 1"), ParseError);
  EXPECT_THROW(parse("if 1 then skip else skip"), ParseError);
}

TEST(Translate, Shapes) {
  auto text = [](const std::string &src) {
    return notac::print_program(translate(parse(src)).program);
  };
  std::string nil = text("x <- nil");
  EXPECT_NE(nil.find("NULL"), std::string::npos);
  EXPECT_NE(nil.find("oom"), std::string::npos);

  Translation sk = translate(parse("skip"));
  EXPECT_EQ(sk.program.body->kind, notac::Cmd::Kind::Skip);
  EXPECT_TRUE(sk.guards.empty());
  EXPECT_FALSE(sk.uses_index);

  Translation w = translate(parse("while 1 do skip end; while 0 do skip end"));
  EXPECT_EQ(w.guards, (std::vector<std::string>{"tr_g1", "tr_g2"}));
  Translation a = translate(parse("p <- alloc(2)"));
  EXPECT_TRUE(a.uses_index);
  EXPECT_NE(notac::print_program(a.program).find("malloc(tr_i)"), std::string::npos);

  EXPECT_THROW(translate(parse("oom <- 1")), TranslateError);
  EXPECT_THROW(translate(parse("tr_x <- 1")), TranslateError);

  // the printed text parses back to the same program
  for (const char *src : {"p <- alloc(3); [p + 1] <- 4; x <- [p + 1]",
                          "i <- 0; while i <= 3 do i <- i + 1 end",
                          "if 1 <= 2 then x <- nil == nil else x <- 0 end"}) {
    std::string once = notac::print_program(translate(parse(src)).program);
    EXPECT_EQ(notac::print_program(notac::parse(once)), once) << src;
  }
}

TEST(Differential, Examples) {
  std::vector<Strategy> fam = parse_family(kDefaultFamily);
  DiffReport r = differential_check(parse("p <- alloc(3); [p + 1] <- 4; x <- [p + 1]; y <- x * 3"),
                                    {}, fam, quick());
  EXPECT_TRUE(r.ok()) << format_diff(r);
  EXPECT_EQ(r.members.size(), fam.size());

  // under the null allocator the translated run stops at the first alloc
  DiffReport n = differential_check(parse("x <- 1; p <- alloc(2); x <- 2"), {}, {null_alloc()},
                                    quick());
  ASSERT_EQ(n.members.size(), 1u);
  EXPECT_EQ(n.members[0].oom, Val(1));
  EXPECT_FALSE(n.members[0].guard_breach);
  EXPECT_EQ(n.members[0].status, notac::Status::Terminated);
  EXPECT_TRUE(n.ok()) << format_diff(n);

  DiffReport bad = differential_check(parse("p <- alloc(1); [p + 1] <- 0"), {}, fam, quick());
  EXPECT_FALSE(bad.precondition);
  EXPECT_FALSE(bad.ok());
}

TEST(Differential, CorpusSuite) {
  auto results = cli::run_ms_suite(test::corpus_path("memsafe"), parse_family(kDefaultFamily));
  EXPECT_EQ(results.size(), 20u);
  for (const cli::MsResult &r : results)
    EXPECT_TRUE(r.ok()) << r.c.file << ": " << r.error << format_diff(r.report);
}

// ---------------------------------------------------------------------------
// Properties.

TEST(MsProperty, AllocIdsAreFreshAndDistinctBlocksNeverCompareEqual) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 6)(rng);
    std::string src = "skip";
    for (int i = 0; i < n; ++i)
      src += "; p" + std::to_string(i) + " <- alloc(" +
             std::to_string(std::uniform_int_distribution<int>(1, 4)(rng)) + ")";
    // reassigning a name allocates a new block, never an old id
    src += "; p0 <- alloc(1)";
    Outcome o = eval_program(parse(src));
    ASSERT_EQ(o.kind, Outcome::Kind::Ok);
    EXPECT_EQ(o.state.next_id, static_cast<std::uint64_t>(n) + 2);
    EXPECT_EQ(o.state.locals.at("p0").id, static_cast<std::uint64_t>(n) + 1);
    for (int i = 1; i < n; ++i) {
      const Value &a = o.state.locals.at("p" + std::to_string(i));
      for (int j = 0; j < n; ++j) {
        if (i == j)
          continue;
        const Value &b = o.state.locals.at("p" + std::to_string(j));
        State s = with({{"a", a}, {"b", b}});
        EXPECT_EQ(ev(s, "a == b"), Value::integer(0));
      }
    }
  }
}

// Random integer programs with in-bounds memory traffic agree with their
// translation under every family member.
TEST(MsProperty, RandomProgramsAgreeUnderTranslation) {
  std::mt19937_64 rng(52);
  std::vector<Strategy> fam = parse_family(kDefaultFamily);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 25; ++trial) {
    std::string src = "a <- " + std::to_string(pick(-3, 3)) + "; b <- " + std::to_string(pick(0, 4));
    std::vector<std::pair<std::string, int>> blocks;
    for (int i = 0; i < 6; ++i) {
      int c = pick(0, 4);
      if (c == 0 || blocks.empty()) {
        std::string p = "m" + std::to_string(blocks.size());
        int k = pick(1, 4);
        src += "; " + p + " <- alloc(" + std::to_string(k) + ")";
        blocks.emplace_back(p, k);
      } else if (c == 1) {
        auto [p, k] = blocks[static_cast<std::size_t>(pick(0, static_cast<int>(blocks.size()) - 1))];
        src += "; [" + p + " + " + std::to_string(pick(0, k - 1)) + "] <- a * b + " +
               std::to_string(pick(0, 9));
      } else if (c == 2) {
        auto [p, k] = blocks[static_cast<std::size_t>(pick(0, static_cast<int>(blocks.size()) - 1))];
        src += "; b <- [" + p + " + " + std::to_string(pick(0, k - 1)) + "]";
      } else if (c == 3) {
        src += "; if a <= b then a <- a + 1 else b <- b - a end";
      } else {
        src += "; i <- 0; while i <= " + std::to_string(pick(0, 3)) + " do a <- a + i; i <- i + 1 end";
      }
    }
    DiffReport r = differential_check(parse(src), {}, fam, quick());
    EXPECT_TRUE(r.ok()) << src << "\n" << format_diff(r);
  }
}
