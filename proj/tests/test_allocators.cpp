#include <gtest/gtest.h>

#include "gai/allocators.hpp"
#include "gai/gai.hpp"
#include "gai/wf_check.hpp"

using namespace gai;

TEST(Eager, FirstFitAndReuse) {
  Strategy e = eager({0, 100, 200});
  Heap h;
  AnyState st = e.init(h);
  Addr a = e.malloc(h, st, 4);
  EXPECT_EQ(a, 101u); // N2 itself is null, so the segment starts above it
  for (Addr x = 101; x < 105; ++x)
    EXPECT_EQ(h.read(x), Val(0));

  Addr z = e.malloc(h, st, 0);
  EXPECT_NE(z, e.null());
  EXPECT_FALSE(h.defined(z));

  e.free(h, st, 101);
  EXPECT_TRUE(h.all_undefined(Interval{101, 105}));
  EXPECT_EQ(e.malloc(h, st, 4), 101u);
}

TEST(Eager, FailsWhenFull) {
  Strategy e = eager({0, 100, 110});
  Heap h;
  AnyState st = e.init(h);
  EXPECT_EQ(e.malloc(h, st, 9), 101u);
  EXPECT_EQ(e.malloc(h, st, 1), e.null());
}

TEST(GuardedEager, LeavesAGapCell) {
  Strategy g = guarded_eager({0, 100, 200});
  Heap h;
  AnyState st = g.init(h);
  EXPECT_EQ(g.malloc(h, st, 4), 101u);
  EXPECT_EQ(g.malloc(h, st, 4), 106u);
  EXPECT_FALSE(h.defined(105));
}

TEST(Bump, Formula) {
  Strategy b = bump({0, 100, 200});
  Heap h;
  AnyState st = b.init(h);
  EXPECT_EQ(b.malloc(h, st, 8), 101u);
  EXPECT_EQ(std::any_cast<Addr>(st), 109u);
  EXPECT_EQ(b.malloc(h, st, 0), 109u); // zero-size acts as size one
  EXPECT_EQ(std::any_cast<Addr>(st), 110u);

  Strategy small = bump({0, 100, 104});
  Heap h2;
  AnyState st2 = small.init(h2);
  EXPECT_EQ(small.malloc(h2, st2, 8), 100u);
  EXPECT_EQ(std::any_cast<Addr>(st2), 101u);
}

TEST(LenientBump, NullCellReadable) {
  Strategy lb = lenient_bump({0, 100, 200});
  Heap h;
  lb.init(h);
  EXPECT_EQ(h.read(100), Val(0));
  Strategy b = bump({0, 100, 200});
  Heap h2;
  b.init(h2);
  EXPECT_FALSE(h2.defined(100));
}

TEST(Curious, CommitsByFirstCell) {
  CuriousAlloc c(8, 1023);
  Strategy s = c;
  Heap h;
  AnyState st = s.init(h);
  Addr first = s.malloc(h, st, 4);
  EXPECT_EQ(first, c.upper_max() + 1);
  EXPECT_EQ(s.malloc(h, st, 0), s.null());

  // positive first cell: upper semispace
  h.assign(first, 5);
  Addr second = s.malloc(h, st, 4);
  EXPECT_GE(second, c.lower_max() + 1);
  EXPECT_LE(second + 4 - 1, c.upper_max());

  // otherwise: lower semispace
  Heap h2;
  AnyState st2 = s.init(h2);
  Addr f2 = s.malloc(h2, st2, 4);
  h2.assign(f2, -1);
  Addr s2 = s.malloc(h2, st2, 4);
  EXPECT_GE(s2, 1u);
  EXPECT_LE(s2 + 4 - 1, c.lower_max());
}

TEST(NullAlloc, AlwaysFails) {
  Strategy n = null_alloc();
  Heap h{{0, 1}};
  AnyState st = n.init(h);
  EXPECT_EQ(n.malloc(h, st, 1), n.null());
  EXPECT_FALSE(h.defined(0));
}

TEST(NoZero, WrapsInner) {
  Strategy nz = no_zero(bump({0, 100, 200}));
  Strategy b = bump({0, 100, 200});
  Heap h1, h2;
  AnyState s1 = nz.init(h1), s2 = b.init(h2);
  EXPECT_EQ(nz.malloc(h1, s1, 0), b.null());
  EXPECT_EQ(std::any_cast<Addr>(s1), 101u);
  EXPECT_EQ(nz.malloc(h1, s1, 8), b.malloc(h2, s2, 8));
  EXPECT_EQ(h1, h2);
}

TEST(Selection, ParsesAndRoundTrips) {
  for (const char *s : {"eager:0,64,1024", "guarded-eager:0,64,1024", "bump:0,64,1024",
                        "lenient-bump:0,64,128", "curious:8,1023", "null",
                        "nozero(bump:0,64,1024)", "null:7"})
    EXPECT_EQ(parse_strategy(s).spec(), s);
  EXPECT_EQ(parse_family(kDefaultFamily).size(), 7u);
  EXPECT_THROW(parse_strategy("eager:5,4,3"), std::invalid_argument);
  EXPECT_THROW(parse_strategy("eager:1,2"), std::invalid_argument);
  EXPECT_THROW(parse_strategy("firstfit:1,2,3"), std::invalid_argument);
  EXPECT_THROW(parse_strategy("nozero(bump:0,1,2"), std::invalid_argument);
  EXPECT_THROW(parse_family(" ; "), std::invalid_argument);
}

// Random malloc/free/write interleavings over every shipped strategy.
TEST(AllocatorProperty, FreshBlocksAvoidLiveAndReserved) {
  const AddrSet reserved = AddrSet::range(4096, 4100);
  for (const Strategy &alpha : parse_family(kDefaultFamily)) {
    std::mt19937_64 rng(21);
    for (int run = 0; run < 100; ++run) {
      Heap h;
      h.define(Interval{4096, 4100}, Val(0));
      AnyState st = alpha.init(h);
      std::map<Addr, Size> live;
      for (int step = 0; step < 20; ++step) {
        int c = std::uniform_int_distribution<int>(0, 9)(rng);
        if (c < 3 && !live.empty()) {
          auto it = std::next(live.begin(), std::uniform_int_distribution<long>(
                                                0, static_cast<long>(live.size()) - 1)(rng));
          alpha.free(h, st, it->first);
          live.erase(it);
          continue;
        }
        Size k = gen_size(rng);
        Addr a = alpha.malloc(h, st, k);
        if (a == alpha.null())
          continue;
        AddrSet taken = reserved;
        for (const auto &[b, n] : live)
          taken.insert(Interval{b, b + n});
        EXPECT_FALSE(taken.intersects(Interval{a, a + k})) << alpha.spec();
        EXPECT_TRUE(h.all_defined(Interval{a, a + k})) << alpha.spec();
        live[a] = k;
      }
    }
  }
}

TEST(AllocatorProperty, BumpStateStrictlyIncreases) {
  for (const char *spec : {"bump:0,64,1024", "lenient-bump:0,64,128"}) {
    Strategy b = parse_strategy(spec);
    std::mt19937_64 rng(5);
    Heap h;
    AnyState st = b.init(h);
    Addr prev = std::any_cast<Addr>(st);
    for (int i = 0; i < 200; ++i) {
      Size k = gen_size(rng);
      Addr a = b.malloc(h, st, k);
      Addr now = std::any_cast<Addr>(st);
      if (a != b.null()) {
        EXPECT_GT(now, prev);
        EXPECT_LT(a, now);
        EXPECT_LT(b.null(), now);
      } else {
        EXPECT_EQ(now, prev);
      }
      prev = now;
    }
  }
}

TEST(AllocatorProperty, EagerFreeThenSameMallocKeepsDomain) {
  std::mt19937_64 rng(6);
  for (const char *spec : {"eager:0,64,1024", "guarded-eager:0,64,1024"}) {
    Strategy e = parse_strategy(spec);
    for (int run = 0; run < 200; ++run) {
      Heap h;
      AnyState st = e.init(h);
      std::vector<std::pair<Addr, Size>> blocks;
      for (int i = 0; i < 6; ++i) {
        Size k = gen_size(rng);
        Addr a = e.malloc(h, st, k);
        if (a != e.null())
          blocks.emplace_back(a, k);
      }
      if (blocks.empty())
        continue;
      auto [a, k] = blocks[std::uniform_int_distribution<std::size_t>(0, blocks.size() - 1)(rng)];
      AddrSet before = h.domain();
      e.free(h, st, a);
      Addr again = e.malloc(h, st, k);
      EXPECT_NE(again, e.null());
      EXPECT_EQ(h.domain(), before) << spec;
    }
  }
}

TEST(WfCheck, LenientBumpAndGuardedEagerPass) {
  for (const char *spec : {"lenient-bump:0,64,128", "guarded-eager:0,64,1024"}) {
    Heap h;
    for (const WfReport &r : wf_check(parse_strategy(spec), {}, h, 500, 3, 12))
      EXPECT_TRUE(r.pass) << format_report(r);
  }
}
