#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ostore/analysis.hpp"
#include "ostore/errors.hpp"
#include "ostore/recursive.hpp"
#include "ostore/shuffle.hpp"
#include "ostore/workload.hpp"

using namespace ostore;

TEST(TrackerWeights, HandComputedExample) {
  PassFlow a{{{2, 1}, {0, 3}}};
  PassFlow b{{{1, 1}, {1, 2}}};
  auto P = tracker_weights({a, b}, 0);
  ASSERT_EQ(P.size(), 3u);
  EXPECT_DOUBLE_EQ(P[1][0], 2.0 / 3);
  EXPECT_DOUBLE_EQ(P[1][1], 1.0 / 3);
  EXPECT_NEAR(P[2][0], 4.0 / 9, 1e-15);
  EXPECT_NEAR(P[2][1], 5.0 / 9, 1e-15);
  EXPECT_NEAR(max_key_weight(P, {a, b}), 2.0 / 9, 1e-15);
  auto per_pass = max_key_weight_per_pass(P, {a, b});
  ASSERT_EQ(per_pass.size(), 2u);
  EXPECT_NEAR(per_pass[0], 1.0 / 3, 1e-15);
}

TEST(TrackerWeights, NoPassesIsPointMass) {
  auto P = tracker_weights({}, 2, 4);
  ASSERT_EQ(P.size(), 1u);
  EXPECT_EQ(P[0], (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(max_key_weight(P, {}), 0.0);
  EXPECT_THROW(tracker_weights({}, 4, 4), Error);
}

TEST(TrackerWeights, LostMassDetected) {
  PassFlow broken{{{0, 0}}};
  try {
    tracker_weights({broken}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNormalizationBroken);
  }
}

TEST(ExtractFlows, MatchesShuffleStructure) {
  ServerStore store({64, 8, true});
  SessionRng rng(4);
  ClientContext ctx(store, KeyMaterial::generate(rng), rng.derive(1));
  Stager s(ctx, key_prefix(1, 0));
  for (int i = 0; i < 64; ++i) s.add(Item{LogicalKey::dummy(i), std::nullopt});
  s.flush();
  ShuffleConfig cfg;
  cfg.passes = 3;
  buffer_shuffle(ctx, 1, 64, cfg);
  auto flows = extract_flows(store.trace(), 1, 8);
  ASSERT_EQ(flows.size(), 3u);
  for (const auto& f : flows) {
    ASSERT_EQ(f.X.size(), 8u);
    ASSERT_EQ(f.outputs(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_EQ(f.input_size(k), 8u);
      EXPECT_EQ(f.output_size(k), 8u);
    }
  }
  auto P = tracker_weights(flows, 0);
  EXPECT_GE(max_key_weight(P, flows), 1.0 / 64);
}

TEST(Mixing, SingleGroupIsPerfect) {
  auto s = mixing_experiment(16, 16, 1, 3, 1);
  for (double w : s.final_weights()) EXPECT_NEAR(w, 1.0 / 16, 1e-15);
}

TEST(Mixing, MorePassesMixBetter) {
  double prev = 1.0;
  for (std::size_t b = 1; b <= 4; ++b) {
    double m = mixing_experiment(256, 8, b, 5, 100 + b).mean();
    EXPECT_LT(m, prev) << "b=" << b;
    EXPECT_GE(m, 1.0 / 256);
    prev = m;
  }
}

TEST(Mixing, SummaryStatistics) {
  MixingSummary s;
  for (int i = 0; i < 5; ++i) s.trials.push_back({static_cast<std::size_t>(i), {1.0, static_cast<double>(i)}});
  EXPECT_DOUBLE_EQ(s.mean(), 2.0);
  EXPECT_DOUBLE_EQ(s.fraction_at_most(1.0), 0.4);
  EXPECT_DOUBLE_EQ(s.quantile(0.5), 2.0);
  EXPECT_DOUBLE_EQ(s.quantile(1.0), 4.0);
}

TEST(Statistics, KsControls) {
  SessionRng rng(12);
  std::vector<double> uniform, skewed;
  for (int i = 0; i < 5000; ++i) {
    double u = rng.uniform01();
    uniform.push_back(u);
    skewed.push_back(u * u);
  }
  EXPECT_GT(ks_uniform(uniform).p_value, 0.01);
  EXPECT_LT(ks_uniform(skewed).p_value, 1e-6);
  EXPECT_DOUBLE_EQ(kolmogorov_q(0.0), 1.0);
  EXPECT_LT(kolmogorov_q(3.0), 1e-6);
  // Tabulated: Q(1.36) ~ 0.049.
  EXPECT_NEAR(kolmogorov_q(1.36), 0.0494, 5e-4);
}

TEST(Statistics, ChiSquare) {
  EXPECT_NEAR(chi_square_uniform_p({100, 100, 100, 100}), 1.0, 1e-12);
  EXPECT_LT(chi_square_uniform_p({200, 100, 100, 0}), 1e-10);
  // chi2 = 4 on 1 df: p = 0.0455.
  EXPECT_NEAR(chi_square_uniform_p({60, 40}), 0.0455003, 1e-6);
}

TEST(Statistics, PermutationRank) {
  std::set<std::uint64_t> seen;
  std::vector<std::size_t> p = {0, 1, 2, 3};
  do {
    seen.insert(permutation_rank(p));
  } while (std::next_permutation(p.begin(), p.end()));
  EXPECT_EQ(seen.size(), 24u);
  EXPECT_EQ(*seen.begin(), 0u);
  EXPECT_EQ(*seen.rbegin(), 23u);
  EXPECT_EQ(permutation_rank({3, 2, 1, 0}), 23u);
}

TEST(TraceShape, IgnoresKeysButNotSizes) {
  TraceEvent a, b;
  a.op = b.op = OpKind::kGet;
  a.key[5] = 1;
  b.key[5] = 2;
  a.items = b.items = 1;
  EXPECT_TRUE(traces_identical({a}, {b}));
  b.items = 0;
  EXPECT_FALSE(traces_identical({a}, {b}));
  b.items = 1;
  b.msg = 1;
  // Same ops, but split over two messages.
  EXPECT_FALSE(traces_identical({a, a}, {a, b}));
  EXPECT_FALSE(traces_identical({a}, {a, a}));
}

TEST(KeyUniformity, SquareRootRequestsLookUniform) {
  OsConfig cfg;
  cfg.N = 900;
  cfg.item_size = 128;
  cfg.seed = 31;
  OsClient client(cfg);
  client.build(initial_items(900));
  SessionRng rng(32);
  for (int i = 0; i < 1500; ++i) client.get(to_bytes(key_name(rng.uniform_below(10))));
  auto r = key_uniformity_test(client.store().trace(), 1000);
  EXPECT_EQ(r.samples, 1500u);
  EXPECT_EQ(r.duplicates, 0u);
  EXPECT_GT(r.p_value, 0.001);
  try {
    key_uniformity_test(client.store().trace(), 5000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}
