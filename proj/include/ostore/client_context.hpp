#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "ostore/bytes.hpp"
#include "ostore/crypto.hpp"
#include "ostore/server_store.hpp"

namespace ostore {

// A logical item as carried inside an encrypted server value. A missing
// value marks a dummy or a deleted key; a filler is a placeholder with no key.
struct Item {
  LogicalKey key;
  std::optional<Bytes> value;
  bool filler = false;

  static Item make_filler() { return Item{{}, std::nullopt, true}; }
};

Bytes encode_item(const Item& item);
Item decode_item(ByteView plaintext);
std::size_t item_overhead(const LogicalKey& key);

// Peak client-resident item count.
class MemoryMeter {
 public:
  void add(std::size_t n) {
    current_ += n;
    if (current_ > peak_) peak_ = current_;
  }
  void sub(std::size_t n) { current_ = n > current_ ? 0 : current_ - n; }
  std::size_t current() const { return current_; }
  std::size_t peak() const { return peak_; }
  void reset_peak() { peak_ = current_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

class MemoryHold {
 public:
  MemoryHold(MemoryMeter& m, std::size_t n) : m_(m), n_(n) { m_.add(n_); }
  ~MemoryHold() { m_.sub(n_); }
  void resize(std::size_t n) {
    m_.sub(n_);
    n_ = n;
    m_.add(n_);
  }
  MemoryHold(const MemoryHold&) = delete;
  MemoryHold& operator=(const MemoryHold&) = delete;

 private:
  MemoryMeter& m_;
  std::size_t n_;
};

// Everything a layer needs to talk to the server: the store handle, the
// session keys and the session RNG.
class ClientContext {
 public:
  ClientContext(ServerStore& store, KeyMaterial keys, SessionRng rng)
      : store_(store), keys_(keys), rng_(std::move(rng)) {}

  ServerStore& store() { return store_; }
  SessionRng& rng() { return rng_; }
  const KeyMaterial& keys() const { return keys_; }
  MemoryMeter& memory() { return memory_; }
  const MemoryMeter& memory() const { return memory_; }

  std::size_t message_size() const { return store_.message_size(); }
  std::size_t item_size() const { return store_.item_size(); }

  Bytes seal(const Item& item) { return encrypt_value(keys_.enc_key, encode_item(item), item_size(), rng_); }
  Item open(ByteView ciphertext) const { return decode_item(decrypt_value(keys_.enc_key, ciphertext)); }

  StoredKey random_key(std::uint8_t prefix);
  StoredKey keyed(std::uint8_t prefix, const Nonce& r, const LogicalKey& k) const;

 private:
  ServerStore& store_;
  KeyMaterial keys_;
  SessionRng rng_;
  MemoryMeter memory_;
};

// Server keys are partitioned by their first byte: level in the high nibble,
// shuffle phase in the low nibble. Phase 0 is the live dictionary.
inline constexpr std::uint8_t kMaxPhase = 15;
inline std::uint8_t key_prefix(std::uint8_t level, std::uint8_t phase) {
  return static_cast<std::uint8_t>((level << 4) | (phase & 0x0f));
}
StoredKey prefix_min(std::uint8_t prefix);
StoredKey prefix_max(std::uint8_t prefix);

}  // namespace ostore
