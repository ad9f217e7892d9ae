#include <gtest/gtest.h>

#include <set>

#include "ostore/analysis.hpp"
#include "ostore/errors.hpp"
#include "ostore/shuffle.hpp"

using namespace ostore;

namespace {

struct Fixture {
  ServerStore store;
  ClientContext ctx;
  Fixture(std::size_t M, std::uint64_t seed, bool trace = true)
      : store({96, M, trace}), ctx(store, keys(seed), SessionRng(seed).derive(2)) {}
  static KeyMaterial keys(std::uint64_t seed) {
    SessionRng r(seed);
    return KeyMaterial::generate(r);
  }

  void stage(std::size_t n, std::size_t fillers = 0, std::uint64_t offset = 0) {
    Stager s(ctx, key_prefix(1, 0));
    for (std::size_t i = 0; i < n; ++i) s.add(Item{LogicalKey::dummy(offset + i), Bytes{}, false});
    for (std::size_t i = 0; i < fillers; ++i) s.add(Item::make_filler());
    s.flush();
  }

  std::multiset<LogicalKey> contents(std::uint8_t phase) {
    std::multiset<LogicalKey> out;
    auto p = key_prefix(1, phase);
    auto got = store.get_range(prefix_min(p), prefix_max(p), 100000);
    for (auto& [k, v] : got) out.insert(ctx.open(v).key);
    return out;
  }
};

std::multiset<LogicalKey> dummies(std::size_t n) {
  std::multiset<LogicalKey> out;
  for (std::size_t i = 0; i < n; ++i) out.insert(LogicalKey::dummy(i));
  return out;
}

}  // namespace

TEST(Stager, WritesFullMessages) {
  Fixture f(10, 1);
  f.stage(25);
  EXPECT_EQ(f.store.stats().roundtrips, 3u);
  EXPECT_EQ(f.store.size(), 25u);
  EXPECT_EQ(f.contents(0), dummies(25));
}

TEST(BufferShuffle, PreservesItemsAndCostsTwoPerGroupPerPass) {
  for (std::size_t passes : {1, 3, 4}) {
    Fixture f(25, 2);
    f.stage(1000);
    f.store.reset_stats();
    ShuffleConfig cfg;
    cfg.passes = passes;
    std::uint8_t last = buffer_shuffle(f.ctx, 1, 1000, cfg);
    EXPECT_EQ(last, passes);
    EXPECT_EQ(f.store.stats().roundtrips, 2 * 40 * passes);
    EXPECT_EQ(f.store.size(), 1000u);
    EXPECT_EQ(f.contents(last), dummies(1000));
  }
}

TEST(BufferShuffle, UnevenLastGroup) {
  Fixture f(16, 3);
  f.stage(100);
  f.store.reset_stats();
  ShuffleConfig cfg;
  cfg.passes = 2;
  auto last = buffer_shuffle(f.ctx, 1, 100, cfg);
  EXPECT_EQ(f.store.stats().roundtrips, 2u * 7 * 2);
  EXPECT_EQ(f.contents(last), dummies(100));
}

TEST(BufferShuffle, CountMismatchDetected) {
  Fixture f(10, 4);
  f.stage(30);
  ShuffleConfig cfg;
  try {
    buffer_shuffle(f.ctx, 1, 31, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCountMismatch);
  }
}

TEST(BufferShuffle, TraceShapeIndependentOfContents) {
  Fixture a(20, 5), b(20, 6);
  a.stage(300);
  b.stage(300, 0, 5000);
  a.store.clear_trace();
  b.store.clear_trace();
  ShuffleConfig cfg;
  buffer_shuffle(a.ctx, 1, 300, cfg);
  buffer_shuffle(b.ctx, 1, 300, cfg);
  EXPECT_TRUE(traces_identical(a.store.trace(), b.store.trace()));
}

TEST(BufferShuffle, FirstPassTransform) {
  Fixture f(10, 7);
  f.stage(40);
  ShuffleConfig cfg;
  cfg.passes = 2;
  int calls = 0;
  auto last = buffer_shuffle(f.ctx, 1, 40, cfg, [&](Item it) {
    ++calls;
    ByteReader r(it.key.payload);
    it.key = LogicalKey::dummy(r.u64() + 100);
    return it;
  });
  EXPECT_EQ(calls, 40);
  std::multiset<LogicalKey> want;
  for (int i = 0; i < 40; ++i) want.insert(LogicalKey::dummy(100 + i));
  EXPECT_EQ(f.contents(last), want);
}

TEST(OracleShuffle, UniformOverSmallPermutations) {
  Fixture f(4, 8, false);
  std::vector<std::uint64_t> counts(24, 0);
  for (int t = 0; t < 24000; ++t) {
    for (std::size_t i = 0; i < 4; ++i) {
      StoredKey k = prefix_min(key_prefix(1, 0));
      k[kKeyWidth - 1] = static_cast<std::uint8_t>(i + 1);
      f.store.put(k, f.ctx.seal(Item{LogicalKey::dummy(i), Bytes{}, false}));
    }
    auto last = oracle_shuffle(f.ctx, 1, 4);
    auto p = key_prefix(1, last);
    std::vector<std::size_t> perm;
    for (auto& [k, v] : f.store.get_range(prefix_min(p), prefix_max(p), 4)) {
      Item item = f.ctx.open(v);
      ByteReader r(item.key.payload);
      perm.push_back(static_cast<std::size_t>(r.u64()));
    }
    ASSERT_EQ(perm.size(), 4u);
    counts[permutation_rank(perm)]++;
    f.store.remove_range(prefix_min(p), prefix_max(p));
  }
  EXPECT_GT(chi_square_uniform_p(counts), 0.001);
}

TEST(Rekey, WritesUnderObfuscatedKeysAndDropsFillers) {
  Fixture f(20, 9);
  f.stage(90, 10);
  ShuffleConfig cfg;
  auto last = buffer_shuffle(f.ctx, 1, 100, cfg);
  f.store.reset_stats();
  Nonce r = fresh_nonce(f.ctx.rng());
  RekeyResult res = rekey_pass(f.ctx, 1, last, 100, r);
  EXPECT_EQ(res.written, 90u);
  EXPECT_EQ(res.dropped, 10u);
  EXPECT_EQ(res.attempts, 1);
  EXPECT_EQ(f.store.stats().roundtrips, 2u * 5 + 1);
  EXPECT_EQ(f.store.size(), 90u);
  for (std::size_t i = 0; i < 90; ++i) {
    EXPECT_TRUE(f.store.contains(f.ctx.keyed(key_prefix(1, 0), res.nonce, LogicalKey::dummy(i))));
  }
}
