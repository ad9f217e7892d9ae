#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ostore/client_context.hpp"

namespace ostore {

enum class ShuffleStrategy { kBuffer, kOracle };

struct ShuffleConfig {
  std::size_t passes = 4;
  std::size_t group_size = 0;  // 0: use the message size
  ShuffleStrategy strategy = ShuffleStrategy::kBuffer;
};

// Applied to every item the first shuffle pass reads.
using ItemTransform = std::function<Item(Item)>;

// Buffers items and writes them to a phase under fresh random keys, M per message.
class Stager {
 public:
  Stager(ClientContext& ctx, std::uint8_t prefix);
  ~Stager() = default;

  void add(Item item);
  void flush();
  std::size_t count() const { return count_; }

 private:
  ClientContext& ctx_;
  std::uint8_t prefix_;
  std::vector<Item> pending_;
  std::size_t count_ = 0;
};

StoredKey next_key(const StoredKey& k);

// Moves the n items of (level, phase 0) through phases 1..b. Returns the final phase.
std::uint8_t buffer_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n, const ShuffleConfig& cfg,
                            const ItemTransform& first_pass = {});

// Reads everything into client memory and writes one exact permutation to phase 1.
std::uint8_t oracle_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n,
                            const ItemTransform& first_pass = {});

std::uint8_t run_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n, const ShuffleConfig& cfg,
                         const ItemTransform& first_pass = {});

struct RekeyResult {
  Nonce nonce{};
  std::size_t written = 0;
  std::size_t dropped = 0;
  int attempts = 0;
};

// Reads (level, src_phase) and writes every keyed item to phase 0 under
// h_r(k). Fillers are dropped. On a key collision the output is wiped and a
// fresh nonce is drawn.
RekeyResult rekey_pass(ClientContext& ctx, std::uint8_t level, std::uint8_t src_phase, std::size_t n,
                       const Nonce& r_new, int max_attempts = 10);

}  // namespace ostore
