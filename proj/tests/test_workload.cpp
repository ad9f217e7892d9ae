#include <gtest/gtest.h>

#include <sstream>

#include "ostore/errors.hpp"
#include "ostore/trace_io.hpp"
#include "ostore/workload.hpp"

using namespace ostore;

TEST(Workload, OpsDeterministic) {
  WorkloadSpec spec;
  spec.os.N = 400;
  spec.accesses = 300;
  auto a = generate_ops(spec);
  auto b = generate_ops(spec);
  ASSERT_EQ(a.size(), 300u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key, b[i].key);
    EXPECT_EQ(a[i].kind, b[i].kind);
  }
  spec.os.seed = 2;
  auto c = generate_ops(spec);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].key != c[i].key;
  EXPECT_TRUE(differs);
}

TEST(Workload, ZipfFavoursLowRanks) {
  WorkloadSpec spec;
  spec.os.N = 1000;
  spec.accesses = 5000;
  spec.distribution = KeyDistribution::kZipf;
  std::size_t top = 0;
  for (const auto& op : generate_ops(spec)) top += op.key == key_name(0) ? 1 : 0;
  EXPECT_GT(top, 500u);
}

TEST(Workload, RunIsReproducible) {
  WorkloadSpec spec;
  spec.os.N = 400;
  spec.os.item_size = 128;
  spec.accesses = 200;
  auto pricing = PricingModel::s3_2011();
  RunOptions opt;
  opt.pricing = &pricing;
  auto a = run_workload(spec, opt);
  auto b = run_workload(spec, opt);
  EXPECT_EQ(a.result_digest, b.result_digest);
  EXPECT_EQ(a.stats.roundtrips, b.stats.roundtrips);
  EXPECT_EQ(a.online_min, 2u);
  EXPECT_EQ(a.online_max, 2u);
  EXPECT_EQ(a.server_items, 420u);
  ASSERT_TRUE(a.cost);
  EXPECT_GT(a.cost->total, 0.0);
  EXPECT_EQ(a.to_json()["accesses"], 200);
}

TEST(Workload, JsonRoundTrip) {
  WorkloadSpec spec;
  spec.os.N = 1234;
  spec.os.c = 3;
  spec.os.frontend = Frontend::kCuckoo;
  spec.accesses = 10;
  spec.distribution = KeyDistribution::kScripted;
  spec.script = {{ScriptedOp::Kind::kPut, "a", "1"}, {ScriptedOp::Kind::kGet, "a", ""}};
  auto back = workload_from_json(workload_to_json(spec));
  EXPECT_EQ(back.os.N, 1234u);
  EXPECT_EQ(back.os.c, 3);
  EXPECT_EQ(back.os.frontend, Frontend::kCuckoo);
  ASSERT_EQ(back.script.size(), 2u);
  EXPECT_EQ(back.script[0].value, "1");
  EXPECT_THROW(config_from_json(nlohmann::json{{"frontend", "nope"}}), Error);
}

TEST(TraceIo, RoundTrip) {
  TraceEvent a;
  a.seq = 3;
  a.msg = 2;
  a.op = OpKind::kGetRange;
  a.key[0] = 0x21;
  a.key_hi = StoredKey{};
  (*a.key_hi)[0] = 0x2f;
  a.items = 5;
  a.affected = 5;
  a.phase = Phase::kRebuild;
  a.access = 9;
  TraceEvent b;
  b.op = OpKind::kPut;
  std::stringstream ss;
  write_trace_jsonl(ss, {a, b});
  auto back = read_trace_jsonl(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].seq, 3u);
  EXPECT_EQ(back[0].op, OpKind::kGetRange);
  EXPECT_EQ(back[0].key, a.key);
  EXPECT_EQ(back[0].key_hi, a.key_hi);
  EXPECT_EQ(back[0].phase, Phase::kRebuild);
  EXPECT_EQ(back[0].access, 9);
  EXPECT_FALSE(back[1].key_hi);

  IoStats s;
  s.roundtrips = 4;
  s.ops[1] = 7;
  s.roundtrips_by_phase[2] = 3;
  auto t = stats_from_json(stats_to_json(s));
  EXPECT_EQ(t.roundtrips, 4u);
  EXPECT_EQ(t.count(OpKind::kPut), 7u);
  EXPECT_EQ(t.roundtrips_in(Phase::kRebuild), 3u);

  std::stringstream bad("{\"op\": \"copy\"}\n");
  EXPECT_THROW(read_trace_jsonl(bad), Error);
}
