#include <gtest/gtest.h>

#include <map>

#include "ostore/errors.hpp"
#include "ostore/recursive.hpp"
#include "ostore/workload.hpp"

using namespace ostore;

namespace {

void replay(const OsConfig& cfg, std::size_t loaded, std::size_t universe, std::size_t ops) {
  OsClient client(cfg);
  std::map<std::string, std::string> oracle;
  std::vector<std::pair<Bytes, Bytes>> items;
  for (std::size_t i = 0; i < loaded; ++i) {
    oracle[key_name(i)] = "v" + std::to_string(i);
    items.emplace_back(to_bytes(key_name(i)), to_bytes(oracle[key_name(i)]));
  }
  client.build(std::move(items));
  SessionRng rng(cfg.seed + 1000);
  for (std::size_t i = 0; i < ops; ++i) {
    std::string k = key_name(rng.uniform_below(universe));
    auto it = oracle.find(k);
    std::optional<Bytes> want = it == oracle.end() ? std::nullopt : std::optional<Bytes>(to_bytes(it->second));
    double u = rng.uniform01();
    if (u < 0.4) {
      ASSERT_EQ(client.get(to_bytes(k)), want) << "op " << i;
    } else if (u < 0.8) {
      std::string v = "p" + std::to_string(i);
      client.put(to_bytes(k), to_bytes(v));
      oracle[k] = v;
    } else {
      ASSERT_EQ(client.remove(to_bytes(k)), want) << "op " << i;
      oracle.erase(k);
    }
  }
}

OsConfig config(std::size_t N, int c, Frontend f) {
  OsConfig cfg;
  cfg.N = N;
  cfg.c = c;
  cfg.item_size = 128;
  cfg.frontend = f;
  cfg.record_trace = false;
  cfg.seed = N * 10 + static_cast<std::uint64_t>(c);
  return cfg;
}

}  // namespace

TEST(OsClient, DirectC2MatchesOracle) { replay(config(400, 2, Frontend::kDirect), 400, 400, 1500); }
TEST(OsClient, CuckooC2MatchesOracle) { replay(config(400, 2, Frontend::kCuckoo), 200, 400, 1500); }
TEST(OsClient, DirectC3MatchesOracle) { replay(config(512, 3, Frontend::kDirect), 512, 512, 800); }
TEST(OsClient, CuckooC3MatchesOracle) { replay(config(343, 3, Frontend::kCuckoo), 150, 343, 300); }

TEST(OsClient, MessageSizeAndConfig) {
  EXPECT_EQ(integer_root(10000, 2), 100u);
  EXPECT_EQ(integer_root(9999, 2), 99u);
  EXPECT_EQ(integer_root(10000, 3), 21u);
  EXPECT_EQ(integer_root(1000000, 3), 100u);
  auto expect_invalid = [](OsConfig cfg) {
    try {
      OsClient client(cfg);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  };
  OsConfig bad = config(100, 1, Frontend::kDirect);
  expect_invalid(bad);
  bad = config(100, 2, Frontend::kDirect);
  bad.message_size = 11;
  expect_invalid(bad);
  OsClient ok(config(10000, 2, Frontend::kDirect));
  EXPECT_EQ(ok.message_size(), 100u);
}

TEST(OsClient, DirectTopLevelLayout) {
  OsConfig cfg = config(900, 2, Frontend::kDirect);
  OsClient client(cfg);
  client.build(initial_items(900));
  EXPECT_EQ(client.store().size(), 930u);
  auto levels = client.levels();
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_EQ(levels[0].n, 900u);
  EXPECT_EQ(levels[0].epoch, 30u);
  EXPECT_FALSE(levels[0].cuckoo_cache);
  client.store().reset_stats();
  EXPECT_EQ(client.get(to_bytes(key_name(3))), std::optional<Bytes>(to_bytes("v0.3")));
  EXPECT_EQ(client.store().stats().roundtrips, 2u);
}

TEST(OsClient, ThreeLevelLayout) {
  OsClient client(config(1000, 3, Frontend::kDirect));
  client.build(initial_items(1000));
  auto levels = client.levels();
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_EQ(levels[0].level, 3);
  EXPECT_EQ(levels[0].epoch, 100u);
  EXPECT_TRUE(levels[0].cuckoo_cache);
  EXPECT_EQ(levels[0].cache_cells, CuckooDict::cell_count(100, {}));
  EXPECT_EQ(levels[1].n, levels[0].cache_cells);
  std::size_t total = 0;
  for (const auto& l : levels) total += l.server_items;
  EXPECT_EQ(total, client.store().size());
}

TEST(OsClient, ValueSizeLimit) {
  OsClient client(config(400, 2, Frontend::kDirect));
  client.build(initial_items(400));
  std::size_t limit = client.max_value_size(key_name(0).size());
  client.put(to_bytes(key_name(1)), Bytes(limit, 'a'));
  EXPECT_EQ(client.get(to_bytes(key_name(1)))->size(), limit);
  try {
    client.put(to_bytes(key_name(1)), Bytes(limit + 1, 'a'));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPlaintextTooLarge);
  }
}

TEST(OsClient, DirectRejectsUnloadedKeys) {
  OsClient client(config(400, 2, Frontend::kDirect));
  client.build(initial_items(400));
  EXPECT_THROW(client.get(to_bytes("never-loaded")), Error);
}

TEST(OsClient, DegenerateSmallInstance) {
  OsConfig cfg = config(16, 2, Frontend::kDirect);
  OsClient client(cfg);
  client.build(initial_items(4));
  EXPECT_TRUE(client.degenerate());
  EXPECT_EQ(client.get(to_bytes(key_name(2))), std::optional<Bytes>(to_bytes("v0.2")));
  EXPECT_FALSE(client.get(to_bytes("zzz")));
}
