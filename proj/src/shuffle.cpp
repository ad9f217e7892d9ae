#include "ostore/shuffle.hpp"

#include <algorithm>
#include <set>

#include "ostore/errors.hpp"

namespace ostore {

namespace {

// Fresh distinct keys for one message, sorted.
std::vector<StoredKey> draw_keys(ClientContext& ctx, std::uint8_t prefix, std::size_t count) {
  std::set<StoredKey> keys;
  while (keys.size() < count) keys.insert(ctx.random_key(prefix));
  return {keys.begin(), keys.end()};
}

void check_acks(const std::vector<Response>& acks) {
  for (const auto& a : acks) {
    if (a.replaced) throw Error(ErrorCode::kKeyCollision, "fresh random key already present");
  }
}

std::size_t group_size(const ClientContext& ctx, const ShuffleConfig& cfg) {
  std::size_t g = cfg.group_size == 0 ? ctx.message_size() : cfg.group_size;
  if (g < 2 && ctx.message_size() >= 2) throw Error(ErrorCode::kInvalidConfig, "group size must be >= 2");
  if (g > ctx.message_size()) throw Error(ErrorCode::kInvalidConfig, "group size exceeds message size");
  return g;
}

}  // namespace

StoredKey next_key(const StoredKey& k) {
  StoredKey out = k;
  for (std::size_t i = out.size(); i-- > 0;) {
    if (++out[i] != 0) break;
  }
  return out;
}

Stager::Stager(ClientContext& ctx, std::uint8_t prefix) : ctx_(ctx), prefix_(prefix) {}

void Stager::add(Item item) {
  pending_.push_back(std::move(item));
  ctx_.memory().add(1);
  ++count_;
  if (pending_.size() == ctx_.message_size()) flush();
}

void Stager::flush() {
  if (pending_.empty()) return;
  auto keys = draw_keys(ctx_, prefix_, pending_.size());
  ctx_.rng().shuffle(pending_);
  std::vector<Request> reqs;
  reqs.reserve(pending_.size());
  for (std::size_t i = 0; i < pending_.size(); ++i) reqs.push_back(Request::put(keys[i], ctx_.seal(pending_[i])));
  ctx_.memory().sub(pending_.size());
  pending_.clear();
  check_acks(ctx_.store().batch(std::move(reqs)));
}

std::uint8_t buffer_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n, const ShuffleConfig& cfg,
                            const ItemTransform& first_pass) {
  if (cfg.passes < 1 || cfg.passes > kMaxPhase) throw Error(ErrorCode::kInvalidConfig, "passes must be in 1..15");
  const std::size_t m = group_size(ctx, cfg);
  const std::size_t groups = (n + m - 1) / m;
  ServerStore& store = ctx.store();

  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    const std::uint8_t src = key_prefix(level, static_cast<std::uint8_t>(pass));
    const std::uint8_t dst = key_prefix(level, static_cast<std::uint8_t>(pass + 1));
    std::size_t read = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t want = std::min(m, n - read);
      auto got = store.get_range(prefix_min(src), prefix_max(src), m);
      if (got.size() != want) {
        throw Error(ErrorCode::kCountMismatch,
                    "pass " + std::to_string(pass) + " group " + std::to_string(g) + " read " +
                        std::to_string(got.size()) + ", expected " + std::to_string(want));
      }
      MemoryHold hold(ctx.memory(), got.size());
      read += got.size();
      std::vector<Item> items;
      items.reserve(got.size());
      for (const auto& [k, v] : got) {
        Item it = ctx.open(v);
        items.push_back(pass == 0 && first_pass ? first_pass(std::move(it)) : std::move(it));
      }
      ctx.rng().shuffle(items);
      auto keys = draw_keys(ctx, dst, items.size());

      std::vector<Request> reqs;
      reqs.reserve(items.size() + 1);
      reqs.push_back(Request::remove_range(got.front().first, got.back().first));
      for (std::size_t i = 0; i < items.size(); ++i) reqs.push_back(Request::put(keys[i], ctx.seal(items[i])));
      auto acks = store.batch(std::move(reqs));
      if (acks[0].removed != got.size()) throw Error(ErrorCode::kCountMismatch, "group remove mismatch");
      check_acks(acks);
    }
  }
  return static_cast<std::uint8_t>(cfg.passes);
}

std::uint8_t oracle_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n,
                            const ItemTransform& first_pass) {
  const std::uint8_t src = key_prefix(level, 0);
  const std::uint8_t dst = key_prefix(level, 1);
  if (n == 0) return 1;
  ServerStore& store = ctx.store();
  auto got = store.get_range(prefix_min(src), prefix_max(src), n);
  if (got.size() != n) throw Error(ErrorCode::kCountMismatch, "oracle shuffle read " + std::to_string(got.size()));
  MemoryHold hold(ctx.memory(), n);
  std::vector<Item> items;
  items.reserve(n);
  for (const auto& [k, v] : got) {
    Item it = ctx.open(v);
    items.push_back(first_pass ? first_pass(std::move(it)) : std::move(it));
  }
  got.clear();
  store.remove_range(prefix_min(src), prefix_max(src));
  ctx.rng().shuffle(items);
  const std::size_t m = ctx.message_size();
  auto keys = draw_keys(ctx, dst, n);
  for (std::size_t start = 0; start < n; start += m) {
    std::vector<Request> reqs;
    for (std::size_t i = start; i < std::min(n, start + m); ++i) reqs.push_back(Request::put(keys[i], ctx.seal(items[i])));
    check_acks(store.batch(std::move(reqs)));
  }
  return 1;
}

std::uint8_t run_shuffle(ClientContext& ctx, std::uint8_t level, std::size_t n, const ShuffleConfig& cfg,
                         const ItemTransform& first_pass) {
  if (cfg.strategy == ShuffleStrategy::kOracle) return oracle_shuffle(ctx, level, n, first_pass);
  return buffer_shuffle(ctx, level, n, cfg, first_pass);
}

RekeyResult rekey_pass(ClientContext& ctx, std::uint8_t level, std::uint8_t src_phase, std::size_t n,
                       const Nonce& r_new, int max_attempts) {
  ServerStore& store = ctx.store();
  const std::size_t m = ctx.message_size();
  const std::uint8_t src = key_prefix(level, src_phase);
  const std::uint8_t dst = key_prefix(level, 0);
  RekeyResult res;
  res.nonce = r_new;

  for (res.attempts = 1;; ++res.attempts) {
    bool collided = false;
    res.written = res.dropped = 0;
    StoredKey cursor = prefix_min(src);
    std::size_t read = 0;
    while (read < n) {
      const std::size_t want = std::min(m, n - read);
      auto got = store.get_range(cursor, prefix_max(src), m);
      if (got.size() != want) throw Error(ErrorCode::kCountMismatch, "rekey read " + std::to_string(got.size()));
      MemoryHold hold(ctx.memory(), got.size());
      read += got.size();
      cursor = next_key(got.back().first);
      std::vector<std::pair<StoredKey, Item>> out;
      std::set<StoredKey> seen;
      for (const auto& [k, v] : got) {
        Item it = ctx.open(v);
        if (it.filler) {
          ++res.dropped;
          continue;
        }
        StoredKey key = ctx.keyed(dst, res.nonce, it.key);
        if (!seen.insert(key).second) collided = true;
        out.emplace_back(key, std::move(it));
      }
      if (collided) break;
      std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<Request> reqs;
      reqs.reserve(out.size());
      for (auto& [k, it] : out) reqs.push_back(Request::put(k, ctx.seal(it)));
      res.written += out.size();
      if (reqs.empty()) continue;
      for (const auto& a : store.batch(std::move(reqs))) collided = collided || a.replaced;
      if (collided) break;
    }
    if (!collided) break;
    store.remove_range(prefix_min(dst), prefix_max(dst));
    if (res.attempts >= max_attempts) throw Error(ErrorCode::kKeyCollision, "rekey kept colliding");
    res.nonce = fresh_nonce(ctx.rng());
  }
  if (n > 0) store.remove_range(prefix_min(src), prefix_max(src));
  return res;
}

}  // namespace ostore
