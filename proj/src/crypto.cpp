#include "ostore/crypto.hpp"

#include <sodium.h>

#include <cstring>

#include "ostore/errors.hpp"

namespace ostore {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error(ErrorCode::kUnsupported, "libsodium failed to initialize");
}

std::array<std::uint8_t, 32> hash32(ByteView data) {
  std::array<std::uint8_t, 32> out;
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

}  // namespace

SessionRng::SessionRng(std::uint64_t seed) {
  ensure_sodium();
  ByteWriter w;
  w.raw(to_bytes("ostore.rng"));
  w.u64(seed);
  key_ = hash32(w.bytes());
}

SessionRng SessionRng::from_entropy() {
  ensure_sodium();
  std::array<std::uint8_t, 32> key;
  randombytes_buf(key.data(), key.size());
  return SessionRng(key);
}

void SessionRng::refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
  buf_.fill(0);
  crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce.data(), block_, key_.data());
  block_ += buf_.size() / 64;
  pos_ = 0;
}

void SessionRng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

std::uint64_t SessionRng::next_u64() {
  std::array<std::uint8_t, 8> b;
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t SessionRng::uniform_below(std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

double SessionRng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

SessionRng SessionRng::derive(std::uint64_t index) const {
  ByteWriter w;
  w.raw(key_);
  w.raw(to_bytes("derive"));
  w.u64(index);
  return SessionRng(hash32(w.bytes()));
}

LogicalKey LogicalKey::dummy(std::uint64_t j) {
  ByteWriter w;
  w.u64(j);
  return {Namespace::kDummy, w.take()};
}

LogicalKey LogicalKey::cell(std::uint8_t level, std::uint64_t index) {
  ByteWriter w;
  w.u8(level);
  w.u64(index);
  return {Namespace::kCell, w.take()};
}

Bytes LogicalKey::encode() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(ns));
  w.raw(payload);
  return w.take();
}

LogicalKey LogicalKey::decode(ByteView encoded) {
  if (encoded.empty()) throw Error(ErrorCode::kMalformed, "empty logical key");
  std::uint8_t ns = encoded[0];
  if (ns < 1 || ns > 3) throw Error(ErrorCode::kMalformed, "bad namespace byte");
  return {static_cast<Namespace>(ns), Bytes(encoded.begin() + 1, encoded.end())};
}

KeyMaterial KeyMaterial::generate(SessionRng& rng) {
  KeyMaterial km;
  rng.fill(km.enc_key);
  rng.fill(km.prf_key);
  return km;
}

Nonce fresh_nonce(SessionRng& rng) {
  Nonce r;
  rng.fill(r);
  return r;
}

StoredKey obfuscate_key(const SecretKey& prf_key, const Nonce& r, const LogicalKey& k) {
  ensure_sodium();
  Bytes enc = k.encode();
  crypto_generichash_state st;
  crypto_generichash_init(&st, prf_key.data(), prf_key.size(), kKeyWidth);
  crypto_generichash_update(&st, r.data(), r.size());
  crypto_generichash_update(&st, enc.data(), enc.size());
  StoredKey out;
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

namespace {

// 24-byte nonce field (the AEAD uses the first 12 bytes), 16-byte tag.
constexpr std::size_t kNonceField = 24;
constexpr std::size_t kTag = 16;

bool use_aes() {
  static const bool aes = crypto_aead_aes256gcm_is_available() != 0;
  return aes;
}

// Expanded AES key for the most recently used secret key.
const crypto_aead_aes256gcm_state& aes_state(const SecretKey& key) {
  struct Cached {
    SecretKey key{};
    bool valid = false;
    alignas(16) crypto_aead_aes256gcm_state state;
  };
  thread_local Cached cached;
  if (!cached.valid || cached.key != key) {
    crypto_aead_aes256gcm_beforenm(&cached.state, key.data());
    cached.key = key;
    cached.valid = true;
  }
  return cached.state;
}

}  // namespace

Bytes encrypt_value(const SecretKey& key, ByteView plaintext, std::size_t item_size, SessionRng& rng) {
  ensure_sodium();
  if (item_size < kCipherOverhead || plaintext.size() > item_size - kCipherOverhead) {
    throw Error(ErrorCode::kPlaintextTooLarge, std::to_string(plaintext.size()) + " bytes do not fit item_size " +
                                                   std::to_string(item_size));
  }
  std::size_t body = item_size - kNonceField - kTag;
  Bytes padded(body, 0);
  auto len = static_cast<std::uint32_t>(plaintext.size());
  for (int i = 0; i < 4; ++i) padded[i] = static_cast<std::uint8_t>(len >> (24 - 8 * i));
  if (!plaintext.empty()) std::memcpy(padded.data() + 4, plaintext.data(), plaintext.size());

  Bytes out(item_size);
  rng.fill(std::span<std::uint8_t>(out.data(), kNonceField));
  unsigned long long clen = 0;
  if (use_aes()) {
    crypto_aead_aes256gcm_encrypt_afternm(out.data() + kNonceField, &clen, padded.data(), padded.size(), nullptr, 0,
                                          nullptr, out.data(), &aes_state(key));
  } else {
    crypto_aead_chacha20poly1305_ietf_encrypt(out.data() + kNonceField, &clen, padded.data(), padded.size(), nullptr,
                                              0, nullptr, out.data(), key.data());
  }
  return out;
}

Bytes decrypt_value(const SecretKey& key, ByteView ciphertext) {
  ensure_sodium();
  if (ciphertext.size() < kCipherOverhead) throw Error(ErrorCode::kAuthFailure, "ciphertext too short");
  Bytes padded(ciphertext.size() - kNonceField - kTag);
  unsigned long long plen = 0;
  int rc = use_aes() ? crypto_aead_aes256gcm_decrypt_afternm(padded.data(), &plen, nullptr,
                                                             ciphertext.data() + kNonceField,
                                                             ciphertext.size() - kNonceField, nullptr, 0,
                                                             ciphertext.data(), &aes_state(key))
                     : crypto_aead_chacha20poly1305_ietf_decrypt(padded.data(), &plen, nullptr,
                                                                 ciphertext.data() + kNonceField,
                                                                 ciphertext.size() - kNonceField, nullptr, 0,
                                                                 ciphertext.data(), key.data());
  if (rc != 0) throw Error(ErrorCode::kAuthFailure, "tag mismatch");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | padded[i];
  if (len > padded.size() - 4) throw Error(ErrorCode::kMalformed, "bad length prefix");
  return Bytes(padded.begin() + 4, padded.begin() + 4 + len);
}

std::uint64_t keyed_hash64(const SecretKey& key, ByteView data) {
  ensure_sodium();
  std::array<std::uint8_t, 8> out;
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), key.data(), key.size());
  std::uint64_t v = 0;
  for (auto b : out) v = (v << 8) | b;
  return v;
}

}  // namespace ostore
