#include <gtest/gtest.h>

#include <map>

#include "ostore/errors.hpp"
#include "ostore/square_root.hpp"

using namespace ostore;

namespace {

struct Fixture {
  ServerStore store;
  ClientContext ctx;
  ClientCache cache;
  SquareRootOs os;

  Fixture(std::size_t n, std::size_t M, std::uint64_t seed)
      : store({96, M, true}),
        ctx(store, keys(seed), SessionRng(seed).derive(2)),
        cache((n + M - 1) / M, &ctx.memory()),
        os(ctx, cache, SquareRootOptions{}) {
    std::vector<Item> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back(Item{LogicalKey::real(name(i)), to_bytes("v" + std::to_string(i))});
    os.build(std::move(items));
  }
  static KeyMaterial keys(std::uint64_t seed) {
    SessionRng r(seed);
    return KeyMaterial::generate(r);
  }
  static std::string name(std::size_t i) { return "k" + std::to_string(i); }
};

}  // namespace

TEST(SquareRoot, BuildLayout) {
  Fixture f(100, 10, 1);
  EXPECT_EQ(f.os.n(), 100u);
  EXPECT_EQ(f.os.epoch_length(), 10u);
  EXPECT_EQ(f.store.size(), 110u);
  EXPECT_EQ(f.os.server_items(), 110u);
  for (std::size_t j = 1; j <= 10; ++j) {
    EXPECT_TRUE(f.store.contains(f.ctx.keyed(key_prefix(2, 0), f.os.nonce(), LogicalKey::dummy(j))));
  }
  EXPECT_TRUE(f.store.contains(f.ctx.keyed(key_prefix(2, 0), f.os.nonce(), LogicalKey::real("k7"))));
}

TEST(SquareRoot, AccessCostsTwoRoundtrips) {
  Fixture f(100, 10, 2);
  f.store.reset_stats();
  EXPECT_EQ(f.os.access(LogicalKey::real("k3")), Value(to_bytes("v3")));
  EXPECT_EQ(f.store.stats().roundtrips, 2u);
  EXPECT_EQ(f.store.stats().count(OpKind::kGet), 1u);
  EXPECT_EQ(f.store.stats().count(OpKind::kRemove), 1u);
}

TEST(SquareRoot, CacheHitFetchesDummy) {
  Fixture f(100, 10, 3);
  f.os.access(LogicalKey::real("k5"), Value(to_bytes("new")));
  EXPECT_EQ(f.os.dummy_counter(), 1u);
  EXPECT_EQ(f.os.access(LogicalKey::real("k5")), Value(to_bytes("new")));
  EXPECT_EQ(f.os.dummy_counter(), 2u);
  EXPECT_EQ(f.cache.size(), 1u);
}

TEST(SquareRoot, EpochSchedule) {
  Fixture f(100, 10, 4);
  const std::size_t epochs_after_build = f.os.epochs_completed();
  f.store.reset_stats();
  for (int i = 0; i < 9; ++i) f.os.access(LogicalKey::real(Fixture::name(i)));
  EXPECT_EQ(f.os.accesses_this_epoch(), 9u);
  EXPECT_EQ(f.os.server_items(), 101u);
  EXPECT_EQ(f.store.stats().roundtrips_in(Phase::kRebuild), 0u);
  f.os.access(LogicalKey::real("k9"));
  EXPECT_EQ(f.os.epochs_completed(), epochs_after_build + 1);
  EXPECT_EQ(f.os.accesses_this_epoch(), 0u);
  EXPECT_EQ(f.os.dummy_counter(), 1u);
  EXPECT_EQ(f.cache.size(), 0u);
  EXPECT_EQ(f.store.size(), 110u);
  EXPECT_GT(f.store.stats().roundtrips_in(Phase::kRebuild), 0u);
}

TEST(SquareRoot, NoKeyRequestedTwicePerEpoch) {
  Fixture f(50, 10, 5);
  f.store.clear_trace();
  for (int i = 0; i < 10; ++i) f.os.access(LogicalKey::real("k1"));
  std::set<StoredKey> seen;
  for (const auto& ev : f.store.trace()) {
    if (ev.op == OpKind::kGet && ev.phase == Phase::kOnline) EXPECT_TRUE(seen.insert(ev.key).second);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(SquareRoot, MatchesOracle) {
  Fixture f(200, 14, 6);
  std::map<std::string, Value> oracle;
  for (std::size_t i = 0; i < 200; ++i) oracle[Fixture::name(i)] = to_bytes("v" + std::to_string(i));
  SessionRng rng(60);
  for (int i = 0; i < 1000; ++i) {
    std::string k = Fixture::name(rng.uniform_below(200));
    if (rng.uniform01() < 0.5) {
      ASSERT_EQ(f.os.access(LogicalKey::real(k)), oracle[k]) << i;
    } else {
      Value v = rng.uniform01() < 0.2 ? Value() : Value(to_bytes("w" + std::to_string(i)));
      ASSERT_EQ(f.os.access(LogicalKey::real(k), v), oracle[k]) << i;
      oracle[k] = v;
    }
  }
  EXPECT_EQ(f.store.size(), 200 + 15 - f.os.accesses_this_epoch());
}

TEST(SquareRoot, WideRoundsSplitAtMessageSize) {
  Fixture f(100, 4, 7);
  f.store.reset_stats();
  std::vector<std::optional<LogicalKey>> keys = {LogicalKey::real("k1"), std::nullopt, LogicalKey::real("k2"),
                                                 LogicalKey::real("k3"), std::nullopt, LogicalKey::real("k4")};
  std::vector<Value> seen;
  f.os.access_round(keys, [&](std::vector<Value>& v) { seen = v; });
  EXPECT_EQ(f.store.stats().roundtrips, 4u);
  ASSERT_EQ(seen.size(), 6u);
  EXPECT_EQ(seen[0], Value(to_bytes("v1")));
  EXPECT_EQ(seen[1], Value());
  EXPECT_EQ(f.os.dummy_counter(), 3u);
}

TEST(SquareRoot, MissIsFatal) {
  Fixture f(20, 5, 8);
  try {
    f.os.access(LogicalKey::real("absent"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissIntolerance);
  }
  EXPECT_THROW(f.os.access(LogicalKey::real("k1")), Error);
}

TEST(ClientCacheTest, OverflowAndDrain) {
  ClientCache cache(2);
  cache.store(LogicalKey::real("a"), to_bytes("1"));
  cache.store(LogicalKey::real("b"), std::nullopt);
  cache.store(LogicalKey::real("a"), to_bytes("2"));
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.lookup(LogicalKey::real("a")), std::optional<Value>(to_bytes("2")));
  EXPECT_EQ(cache.lookup(LogicalKey::real("b")), std::optional<Value>(Value()));
  EXPECT_FALSE(cache.lookup(LogicalKey::real("c")));
  try {
    cache.store(LogicalKey::real("c"), to_bytes("3"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCacheOverflow);
  }
}
