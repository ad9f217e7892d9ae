#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ostore/bytes.hpp"
#include "ostore/server_store.hpp"

namespace ostore {

inline constexpr std::size_t kNonceSize = 16;
inline constexpr std::size_t kSecretKeySize = 32;
// 24-byte nonce field, 16-byte tag, 4-byte length prefix.
inline constexpr std::size_t kCipherOverhead = 44;

using Nonce = std::array<std::uint8_t, kNonceSize>;
using SecretKey = std::array<std::uint8_t, kSecretKeySize>;

// Deterministic ChaCha20 keystream. All client randomness flows through one of these.
class SessionRng {
 public:
  explicit SessionRng(std::uint64_t seed);
  static SessionRng from_entropy();

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Unbiased draw from [0, n).
  std::uint64_t uniform_below(std::uint64_t n);
  double uniform01();
  // Independent stream keyed on (this seed, index); does not advance this stream.
  SessionRng derive(std::uint64_t index) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  explicit SessionRng(const std::array<std::uint8_t, 32>& key) : key_(key) {}
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 512> buf_{};
  std::size_t pos_ = 512;
  std::uint64_t block_ = 0;
};

enum class Namespace : std::uint8_t { kReal = 1, kDummy = 2, kCell = 3 };

struct LogicalKey {
  Namespace ns = Namespace::kReal;
  Bytes payload;

  static LogicalKey real(ByteView key) { return {Namespace::kReal, Bytes(key.begin(), key.end())}; }
  static LogicalKey real(std::string_view key) { return {Namespace::kReal, to_bytes(key)}; }
  static LogicalKey dummy(std::uint64_t j);
  static LogicalKey cell(std::uint8_t level, std::uint64_t index);

  Bytes encode() const;
  static LogicalKey decode(ByteView encoded);

  auto operator<=>(const LogicalKey&) const = default;
  bool operator==(const LogicalKey&) const = default;
};

struct KeyMaterial {
  SecretKey enc_key{};
  SecretKey prf_key{};

  static KeyMaterial generate(SessionRng& rng);
};

Nonce fresh_nonce(SessionRng& rng);

// h(r || k), keyed by the client's PRF key.
StoredKey obfuscate_key(const SecretKey& prf_key, const Nonce& r, const LogicalKey& k);

// Output is exactly item_size bytes.
Bytes encrypt_value(const SecretKey& key, ByteView plaintext, std::size_t item_size, SessionRng& rng);
Bytes decrypt_value(const SecretKey& key, ByteView ciphertext);

inline std::size_t max_plaintext(std::size_t item_size) {
  return item_size > kCipherOverhead ? item_size - kCipherOverhead : 0;
}

// Keyed 64-bit hash used for cuckoo table addressing.
std::uint64_t keyed_hash64(const SecretKey& key, ByteView data);

}  // namespace ostore
