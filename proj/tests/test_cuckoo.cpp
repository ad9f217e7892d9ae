#include <gtest/gtest.h>

#include <map>

#include "ostore/cuckoo.hpp"
#include "ostore/errors.hpp"

using namespace ostore;

namespace {

LogicalKey key(std::size_t i) { return LogicalKey::real("key" + std::to_string(i)); }

struct Fixture {
  SessionRng rng;
  MemoryCellStore cells;
  CuckooDict dict;
  explicit Fixture(std::size_t capacity, std::uint64_t seed = 1, bool record = true)
      : rng(seed), cells(CuckooDict::cell_count(capacity, {}), record), dict(capacity, cells, rng) {}

  std::optional<CuckooEntry> cell(std::uint64_t i) const { return decode_cell(cells.contents()[i]); }
};

}  // namespace

TEST(Cuckoo, Layout) {
  EXPECT_EQ(CuckooDict::table_size(100, 0.3), 130u);
  EXPECT_EQ(CuckooDict::cell_count(100, {}), 264u);
  Fixture f(100);
  for (std::size_t i = 0; i < 50; ++i) {
    auto c = f.dict.lookup_cells(key(i));
    ASSERT_EQ(c.size(), 6u);
    EXPECT_LT(c[0], 130u);
    EXPECT_GE(c[1], 130u);
    EXPECT_LT(c[1], 260u);
    for (std::size_t s = 0; s < 4; ++s) EXPECT_EQ(c[2 + s], 260 + s);
  }
  SessionRng rng(1);
  MemoryCellStore wrong(100);
  EXPECT_THROW(CuckooDict(100, wrong, rng), Error);
}

TEST(Cuckoo, CellEncoding) {
  EXPECT_FALSE(decode_cell(encode_cell(std::nullopt)));
  CuckooEntry e{LogicalKey::dummy(4), to_bytes("abc")};
  EXPECT_EQ(decode_cell(encode_cell(e)), std::optional<CuckooEntry>(e));
  CuckooEntry tomb{LogicalKey::real("t"), std::nullopt};
  EXPECT_EQ(decode_cell(encode_cell(tomb)), std::optional<CuckooEntry>(tomb));
}

TEST(Cuckoo, FirstPlacementInT1) {
  Fixture f(50);
  f.dict.put(key(1), to_bytes("one"));
  auto c = f.cell(f.dict.cell_f1(key(1)));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->first, key(1));
  EXPECT_EQ(f.cells.occupied(), 1u);
  ASSERT_EQ(f.cells.rounds().size(), 1u);
  EXPECT_EQ(f.cells.rounds()[0], f.dict.lookup_cells(key(1)));
}

TEST(Cuckoo, CollisionUsesT2ThenEvicts) {
  Fixture f(50);
  const LogicalKey a = key(0);
  std::size_t i = 1;
  while (f.dict.cell_f1(key(i)) != f.dict.cell_f1(a) || f.dict.cell_f2(key(i)) == f.dict.cell_f2(a)) ++i;
  const LogicalKey b = key(i);
  ++i;
  while (f.dict.cell_f1(key(i)) != f.dict.cell_f1(a) || f.dict.cell_f2(key(i)) != f.dict.cell_f2(b)) ++i;
  const LogicalKey c = key(i);
  f.dict.put(a, to_bytes("a"));
  f.dict.put(b, to_bytes("b"));
  // T1 taken: b goes to its free T2 cell.
  EXPECT_EQ(f.cell(f.dict.cell_f2(b))->first, b);
  EXPECT_EQ(f.dict.stats().evictions, 0u);
  f.dict.put(c, to_bytes("c"));
  // Both cells taken: c takes T1 and a moves to its T2 cell.
  EXPECT_EQ(f.cell(f.dict.cell_f1(a))->first, c);
  EXPECT_EQ(f.cell(f.dict.cell_f2(a))->first, a);
  EXPECT_EQ(f.dict.stats().evictions, 1u);
  for (auto [k, v] : {std::pair{a, "a"}, std::pair{b, "b"}, std::pair{c, "c"}}) {
    EXPECT_EQ(f.dict.get(k), std::optional<Value>(to_bytes(v)));
  }
}

TEST(Cuckoo, RehashPreservesContents) {
  Fixture f(64);
  for (std::size_t i = 0; i < 64; ++i) f.dict.put(key(i), to_bytes(std::to_string(i)));
  f.dict.rehash();
  EXPECT_GE(f.dict.stats().rehashes, 1u);
  EXPECT_EQ(f.dict.size(), 64u);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(f.dict.get(key(i)), std::optional<Value>(to_bytes(std::to_string(i))));
}

TEST(Cuckoo, CapacityEnforced) {
  Fixture f(10);
  for (std::size_t i = 0; i < 10; ++i) f.dict.put(key(i), to_bytes("x"));
  f.dict.put(key(3), to_bytes("y"));
  try {
    f.dict.put(key(10), to_bytes("z"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacityExceeded);
  }
  f.dict.remove(key(0));
  f.dict.put(key(10), to_bytes("z"));
  EXPECT_EQ(f.dict.size(), 10u);
}

TEST(Cuckoo, RarelyRehashesAndInsertsCheaply) {
  int clean = 0;
  double writes = 0, inserts = 0;
  for (int t = 0; t < 100; ++t) {
    Fixture f(1000, 100 + t, false);
    for (std::size_t i = 0; i < 1000; ++i) f.dict.put(key(i), to_bytes("v"));
    if (f.dict.stats().rehashes == 0) ++clean;
    writes += static_cast<double>(f.dict.stats().cell_writes);
    inserts += static_cast<double>(f.dict.stats().inserts);
  }
  EXPECT_GE(clean, 99);
  EXPECT_LE(writes / inserts, 3.0);
}

TEST(Cuckoo, MatchesOracle) {
  Fixture f(1500, 7, false);
  std::map<LogicalKey, Value> oracle;
  SessionRng rng(70);
  for (int i = 0; i < 10000; ++i) {
    LogicalKey k = key(rng.uniform_below(1500));
    double u = rng.uniform01();
    auto it = oracle.find(k);
    std::optional<Value> want = it == oracle.end() ? std::nullopt : std::optional<Value>(it->second);
    if (u < 0.4) {
      ASSERT_EQ(f.dict.get(k), want) << i;
    } else if (u < 0.8) {
      Value v = to_bytes("v" + std::to_string(i));
      f.dict.put(k, v);
      oracle[k] = v;
    } else {
      ASSERT_EQ(f.dict.remove(k), want) << i;
      oracle.erase(k);
    }
    ASSERT_EQ(f.dict.size(), oracle.size());
  }
}

TEST(Cuckoo, GetAndMissLookIdentical) {
  Fixture f(100);
  for (std::size_t i = 0; i < 60; ++i) f.dict.put(key(i), to_bytes("v"));
  f.cells.clear_rounds();
  f.dict.get(key(5));
  auto hit = f.cells.rounds();
  f.cells.clear_rounds();
  f.dict.get(key(5000));
  auto miss = f.cells.rounds();
  ASSERT_EQ(hit.size(), 1u);
  ASSERT_EQ(miss.size(), 1u);
  EXPECT_EQ(hit[0].size(), miss[0].size());
  // Same stash cells, table cells in their own halves.
  EXPECT_TRUE(std::equal(hit[0].begin() + 2, hit[0].end(), miss[0].begin() + 2));
}

TEST(Cuckoo, ResetEmpty) {
  Fixture f(20);
  f.dict.put(key(1), to_bytes("a"));
  for (std::size_t i = 0; i < f.cells.cell_count(); ++i) {
    f.cells.round({i}, [](std::vector<Bytes>& c) { c[0] = encode_cell(std::nullopt); });
  }
  f.dict.reset_empty();
  EXPECT_EQ(f.dict.size(), 0u);
  EXPECT_FALSE(f.dict.get(key(1)));
}
