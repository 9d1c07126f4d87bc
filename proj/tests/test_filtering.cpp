#include <gtest/gtest.h>

#include "gai/allocators.hpp"
#include "gai/filtering.hpp"
#include "gai/gai.hpp"
#include "gai/notac/interp.hpp"
#include "gai/notac/parser.hpp"
#include "support.hpp"

using namespace gai;
using notac::Event;
using notac::Trace;

namespace {

SymEvent M(Size k) { return SymEvent::malloc(k); }
SymEvent Fl(Size k) { return SymEvent::fail(k); }
SymEvent F(std::uint64_t z) { return SymEvent::free(z); }

Event Mal(Size n, Addr a) { return Event::malloc(n, a); }
Event Fr(Addr a) { return Event::free(a); }
Event Ob(int v) { return Event::obs(v); }

Trace run_src(const std::string &src, const Strategy &alpha) {
  notac::Program p = notac::parse(src);
  notac::EnvSetup s = notac::make_env(p, 4096);
  return notac::run(s.env, alpha, p, s.heap).trace;
}

Trace prefix(const Trace &t, std::size_t n) {
  return Trace(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n));
}

bool is_subsequence(const Trace &sub, const Trace &t) {
  std::size_t i = 0;
  for (const Event &e : t)
    if (i < sub.size() && sub[i] == e)
      ++i;
  return i == sub.size();
}

} // namespace

TEST(XFilterFree, Examples) {
  AllocationMap m;
  m.add({0x1000, 8, 1});
  SymbolicSeq s{M(8), F(0)};
  EXPECT_TRUE(x_filter_free(m, 0x1000, s, 1));
  EXPECT_FALSE(x_filter_free(m, 0x1001, s, 1));
  EXPECT_FALSE(x_filter_free(m, 0x1000, s, 2)); // nothing left
  EXPECT_FALSE(x_filter_free(m, 0x1000, SymbolicSeq{M(8), M(4)}, 1));
  EXPECT_FALSE(x_filter_free(AllocationMap{}, 0x1000, s, 1));
  EXPECT_TRUE(x_filter_free(m, 0x1000, SymbolicSeq{M(8)}, SymbolicSeq{F(0)}));
}

TEST(SymFilter, Examples) {
  auto ok = sym_filter({Mal(8, 0x1000), Fr(0x1000)}, {M(8), F(0)});
  ASSERT_TRUE(ok);
  EXPECT_TRUE(ok->residue.empty());

  // an off-by-one free stays in the residue; the F0 is then left over
  Trace off{Mal(8, 0x1000), Fr(0x1001)};
  EXPECT_FALSE(sym_filter(off, {M(8), F(0)}));
  auto tail = sym_filter(off, {M(8), F(0)}, FilterMode::AllowTail);
  ASSERT_TRUE(tail);
  EXPECT_EQ(tail->residue, (Trace{Fr(0x1001)}));
  EXPECT_EQ(tail->unconsumed, (SymbolicSeq{F(0)}));
  auto plain = sym_filter(off, {M(8)});
  ASSERT_TRUE(plain);
  EXPECT_EQ(plain->residue, (Trace{Fr(0x1001)}));

  // the passed map never shrinks, so a double free of the same block passes
  auto dbl = sym_filter({Mal(8, 0x1000), Fr(0x1000), Fr(0x1000)}, {M(8), F(0), F(0)});
  ASSERT_TRUE(dbl);
  EXPECT_TRUE(dbl->residue.empty());

  EXPECT_FALSE(sym_filter({Mal(8, 0x1000)}, {M(4)}));
  EXPECT_FALSE(sym_filter({Event::mfail(8)}, {M(8)}));
  EXPECT_FALSE(sym_filter({Mal(8, 0x1000)}, {}));

  auto vis = sym_filter({Ob(1), Event::cast(7), Event::mfail(3)}, {Fl(3)});
  ASSERT_TRUE(vis);
  EXPECT_EQ(vis->residue, (Trace{Ob(1), Event::cast(7)}));
}

TEST(Similar, TraceSimilarityProgram) {
  const char *src = "p = malloc(8); free(p); observe(1); observe(p);";
  Trace t1 = run_src(src, eager({0, 64, 1024}));
  Trace t2 = run_src(src, bump({0, 300, 1024}));
  ASSERT_EQ(t1.size(), 4u);
  ASSERT_EQ(t2.size(), 4u);
  EXPECT_FALSE(is_similar(t1, t2));
  EXPECT_FALSE(similar_bruteforce(t1, t2));

  SimilarResult r = similar(prefix(t1, 3), prefix(t2, 3));
  ASSERT_TRUE(r.similar);
  EXPECT_EQ(r.sigma, (SymbolicSeq{M(8), F(0)}));
  EXPECT_EQ(r.residue, (Trace{Ob(1)}));
  EXPECT_TRUE(similar_bruteforce(prefix(t1, 3), prefix(t2, 3)));

  EXPECT_EQ(prefixes_similar_to(prefix(t1, 3), t2), (std::vector<std::size_t>{3}));
  EXPECT_TRUE(prefixes_similar_to(t1, t2).empty());
}

TEST(Similar, Examples) {
  // the second free is not a block start: filtered as residue on both sides
  SimilarResult r = similar({Mal(8, 100), Fr(100)}, {Mal(8, 200), Fr(100)});
  ASSERT_TRUE(r.similar);
  EXPECT_EQ(r.sigma, (SymbolicSeq{M(8)}));
  EXPECT_EQ(r.residue, (Trace{Fr(100)}));

  EXPECT_FALSE(is_similar({Mal(8, 100)}, {Event::mfail(8)}));
  EXPECT_FALSE(is_similar({Mal(8, 100)}, {Mal(4, 100)}));
  EXPECT_FALSE(is_similar({Ob(1)}, {Ob(2)}));
  EXPECT_TRUE(is_similar({}, {}));
  EXPECT_FALSE(is_similar({}, {Ob(1)}));
  EXPECT_TRUE(is_similar({Mal(0, 100), Mal(0, 101), Fr(101), Fr(100)},
                         {Mal(0, 200), Mal(0, 100), Fr(100), Fr(200)}));
  EXPECT_FALSE(is_similar({Mal(0, 100), Mal(0, 101), Fr(101)},
                          {Mal(0, 200), Mal(0, 100), Fr(200)}));
  EXPECT_THROW(similar_bruteforce(Trace(11, Ob(0)), {}), std::invalid_argument);
}

TEST(PrefixesSimilarTo, Examples) {
  Trace run{Mal(8, 200), Fr(200), Ob(1), Fr(200), Ob(2)};
  EXPECT_EQ(prefixes_similar_to({}, run), (std::vector<std::size_t>{0}));
  // run[0..2) frees a block t never frees
  EXPECT_EQ(prefixes_similar_to({Mal(8, 100)}, run), (std::vector<std::size_t>{1}));
  EXPECT_EQ(prefixes_similar_to({Mal(8, 100), Fr(100), Ob(1)}, run),
            (std::vector<std::size_t>{3}));
  EXPECT_EQ(prefixes_similar_to({Mal(8, 100), Ob(1), Fr(100)}, run),
            (std::vector<std::size_t>{3}));
  EXPECT_TRUE(prefixes_similar_to({Ob(3)}, run).empty());
}

// ---------------------------------------------------------------------------
// Properties against the independent oracles.

TEST(FilterProperty, MatchesOracle) {
  std::mt19937_64 rng(31);
  int accepted = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    Trace t = test::random_trace(rng, 7);
    // half the time use the trace's own symbolic reading, so most runs pass
    SymbolicSeq s = test::symbolize(t);
    if (trial % 2 == 1 && !s.empty())
      s.erase(s.begin() + std::uniform_int_distribution<long>(
                              0, static_cast<long>(s.size()) - 1)(rng));
    auto got = sym_filter(t, s);
    auto want = test::oracle_filter(t, s);
    ASSERT_EQ(got.has_value(), want.has_value()) << notac::to_string(t) << " / " << to_string(s);
    if (!got)
      continue;
    ++accepted;
    EXPECT_EQ(got->residue, *want);
    EXPECT_TRUE(is_subsequence(got->residue, t));
    EXPECT_EQ(got->consumed, s);
    for (const Event &e : got->residue)
      EXPECT_FALSE(e.is_alloc());
  }
  EXPECT_GT(accepted, 5000);
}

TEST(FilterProperty, SymbolizedReadingLeavesOnlyStrayFrees) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 5000; ++trial) {
    Trace t = test::random_trace(rng, 8);
    auto f = sym_filter(t, test::symbolize(t));
    ASSERT_TRUE(f) << notac::to_string(t);
    std::size_t visible = 0;
    for (const Event &e : t)
      visible += (e.kind == Event::Kind::Obs || e.kind == Event::Kind::Cast) ? 1 : 0;
    std::size_t resVisible = 0;
    for (const Event &e : f->residue)
      resVisible += e.kind == Event::Kind::Free ? 0 : 1;
    EXPECT_EQ(resVisible, visible);
  }
}

TEST(SimilarProperty, AgreesWithBruteForceAndOracle) {
  std::mt19937_64 rng(33);
  int similarCount = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    Trace t1 = test::random_trace(rng, 6);
    Trace t2 = trial % 3 == 0   ? test::random_trace(rng, 6)
               : trial % 3 == 1 ? test::related_trace(rng, t1, 6)
                                : test::permute_addresses(t1, {200, 100, 101});
    SimilarResult r = similar(t1, t2);
    bool brute = similar_bruteforce(t1, t2);
    ASSERT_EQ(r.similar, brute) << notac::to_string(t1) << " ~ " << notac::to_string(t2);
    EXPECT_EQ(brute, test::oracle_similar(t1, t2));
    if (r.similar) {
      ++similarCount;
      auto f1 = test::oracle_filter(t1, r.sigma);
      auto f2 = test::oracle_filter(t2, r.sigma);
      ASSERT_TRUE(f1 && f2);
      EXPECT_EQ(*f1, *f2);
    }
  }
  EXPECT_GT(similarCount, 500);
}

TEST(SimilarProperty, ReflexiveAndSymmetric) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 3000; ++trial) {
    Trace t1 = test::random_trace(rng, 8);
    EXPECT_TRUE(is_similar(t1, t1)) << notac::to_string(t1);
    Trace t2 = trial % 2 ? test::related_trace(rng, t1, 8)
                         : test::permute_addresses(t1, {101, 200, 100});
    EXPECT_EQ(is_similar(t1, t2), is_similar(t2, t1))
        << notac::to_string(t1) << " ~ " << notac::to_string(t2);
  }
}

TEST(SimilarProperty, ExtendingWithTheSameVisibleEventKeepsSimilarity) {
  std::mt19937_64 rng(35);
  int checked = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    Trace t1 = test::random_trace(rng, 6);
    Trace t2 = test::related_trace(rng, t1, 6);
    if (!is_similar(t1, t2))
      continue;
    ++checked;
    for (const Event &e : {Ob(1), Event::cast(100), Fr(101)}) {
      Trace a = t1, b = t2;
      a.push_back(e);
      b.push_back(e);
      EXPECT_TRUE(is_similar(a, b)) << notac::to_string(a) << " ~ " << notac::to_string(b);
    }
  }
  EXPECT_GT(checked, 200);
}

// Runs of small malloc/free programs: filtering a run by its own symbolic
// reading, when that reading is well formed and leaves no residue, is a
// sequence the producing allocator can replay.
TEST(FilterProperty, EmptyResidueReplaysUnderTheProducer) {
  std::mt19937_64 rng(36);
  int replayed = 0;
  std::vector<Strategy> family = parse_family(kDefaultFamily);
  for (int trial = 0; trial < 300; ++trial) {
    std::string src;
    int vars = 3;
    for (int i = 0; i < 8; ++i) {
      std::string v = "p" + std::to_string(std::uniform_int_distribution<int>(0, vars - 1)(rng));
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0)
        src += "free(" + v + "); ";
      else
        src += v + " = malloc(" +
               std::to_string(std::uniform_int_distribution<int>(0, 9)(rng)) + "); ";
    }
    notac::Program p = notac::parse(src);
    notac::EnvSetup s = notac::make_env(p, 4096);
    for (const Strategy &alpha : family) {
      notac::Outcome o = notac::run(s.env, alpha, p, s.heap);
      if (o.status != notac::Status::Terminated)
        continue;
      SymbolicSeq sigma = test::symbolize(o.trace);
      auto f = sym_filter(o.trace, sigma);
      ASSERT_TRUE(f);
      if (!f->residue.empty() || !symseq_well_formed(sigma))
        continue;
      Heap h0 = s.heap;
      AnyState st = alpha.init(h0);
      EXPECT_TRUE(feasible_run(alpha, s.reserved, h0, st, UpdateSeq(sigma.size()), sigma))
          << alpha.spec() << ": " << src;
      ++replayed;
    }
  }
  EXPECT_GT(replayed, 300);
}
