#include <gtest/gtest.h>

#include <set>

#include "ostore/crypto.hpp"
#include "ostore/errors.hpp"

using namespace ostore;

TEST(SessionRng, Deterministic) {
  SessionRng a(42), b(42), c(43);
  std::vector<std::uint64_t> va, vb, vc;
  for (int i = 0; i < 200; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(SessionRng(42).derive(1).next_u64(), SessionRng(42).derive(2).next_u64());
  EXPECT_EQ(SessionRng(42).derive(1).next_u64(), SessionRng(42).derive(1).next_u64());
}

TEST(SessionRng, UniformBelow) {
  SessionRng rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = rng.uniform_below(7);
    ASSERT_LT(v, 7u);
    counts[v]++;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(rng.uniform_below(1), 0u);
}

TEST(Encryption, RoundTrip) {
  SessionRng rng(1);
  auto keys = KeyMaterial::generate(rng);
  for (std::size_t len : {0, 1, 17, 84}) {
    Bytes pt(len);
    for (std::size_t i = 0; i < len; ++i) pt[i] = static_cast<std::uint8_t>(i * 7);
    Bytes ct = encrypt_value(keys.enc_key, pt, 128, rng);
    EXPECT_EQ(ct.size(), 128u);
    EXPECT_EQ(decrypt_value(keys.enc_key, ct), pt);
  }
  EXPECT_EQ(max_plaintext(128), 84u);
  try {
    encrypt_value(keys.enc_key, Bytes(85), 128, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPlaintextTooLarge);
  }
}

TEST(Encryption, FreshNonceEachTime) {
  SessionRng rng(1);
  auto keys = KeyMaterial::generate(rng);
  Bytes pt = to_bytes("same plaintext");
  EXPECT_NE(encrypt_value(keys.enc_key, pt, 64, rng), encrypt_value(keys.enc_key, pt, 64, rng));
}

TEST(Encryption, TamperDetected) {
  SessionRng rng(2);
  auto keys = KeyMaterial::generate(rng);
  Bytes ct = encrypt_value(keys.enc_key, to_bytes("secret"), 96, rng);
  for (std::size_t pos : {0, 5, 30, 60, 95}) {
    Bytes bad = ct;
    bad[pos] ^= 0x01;
    if (pos >= 12 && pos < 24) continue;  // unused nonce tail
    try {
      decrypt_value(keys.enc_key, bad);
      FAIL() << "byte " << pos;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kAuthFailure);
    }
  }
  auto other = KeyMaterial::generate(rng);
  EXPECT_THROW(decrypt_value(other.enc_key, ct), Error);
  EXPECT_THROW(decrypt_value(keys.enc_key, Bytes(10)), Error);
}

TEST(KeyObfuscation, DeterministicAndNonceDependent) {
  SessionRng rng(9);
  auto keys = KeyMaterial::generate(rng);
  Nonce r1 = fresh_nonce(rng), r2 = fresh_nonce(rng);
  auto k = LogicalKey::real("alpha");
  EXPECT_EQ(obfuscate_key(keys.prf_key, r1, k), obfuscate_key(keys.prf_key, r1, k));
  EXPECT_NE(obfuscate_key(keys.prf_key, r1, k), obfuscate_key(keys.prf_key, r2, k));
  EXPECT_NE(obfuscate_key(keys.prf_key, r1, k), obfuscate_key(keys.prf_key, r1, LogicalKey::real("beta")));
  // Same payload bytes in different namespaces are distinct keys.
  LogicalKey d = LogicalKey::dummy(1);
  LogicalKey fake{Namespace::kReal, d.payload};
  EXPECT_NE(obfuscate_key(keys.prf_key, r1, d), obfuscate_key(keys.prf_key, r1, fake));
}

TEST(KeyObfuscation, NoCollisions) {
  SessionRng rng(10);
  auto keys = KeyMaterial::generate(rng);
  Nonce r = fresh_nonce(rng);
  std::set<StoredKey> seen;
  for (std::uint64_t j = 0; j < 100000; ++j) {
    ASSERT_TRUE(seen.insert(obfuscate_key(keys.prf_key, r, LogicalKey::dummy(j))).second);
  }
}

TEST(LogicalKey, EncodeDecode) {
  for (const LogicalKey& k : {LogicalKey::real("x"), LogicalKey::real(""), LogicalKey::dummy(123456789),
                              LogicalKey::cell(3, 77)}) {
    EXPECT_EQ(LogicalKey::decode(k.encode()), k);
  }
  EXPECT_THROW(LogicalKey::decode(Bytes{}), Error);
}

TEST(KeyedHash, Stable) {
  SessionRng rng(11);
  auto keys = KeyMaterial::generate(rng);
  EXPECT_EQ(keyed_hash64(keys.prf_key, to_bytes("a")), keyed_hash64(keys.prf_key, to_bytes("a")));
  EXPECT_NE(keyed_hash64(keys.prf_key, to_bytes("a")), keyed_hash64(keys.enc_key, to_bytes("a")));
}
