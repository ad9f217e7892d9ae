#include "ostore/square_root.hpp"

#include <algorithm>

#include "ostore/errors.hpp"

namespace ostore {

SquareRootOs::SquareRootOs(ClientContext& ctx, CacheDict& cache, SquareRootOptions opts)
    : ctx_(ctx), cache_(cache), opts_(opts) {
  if (opts_.level == 0 || opts_.level > 15) throw Error(ErrorCode::kInvalidConfig, "level must be in 1..15");
}

void SquareRootOs::build(std::vector<Item> items) {
  PhaseScope scope(ctx_.store(), Phase::kBuild);
  const std::size_t m = ctx_.message_size();
  n_ = items.size();
  D_ = opts_.epoch != 0 ? opts_.epoch : (n_ + m - 1) / m;
  D_ = std::max({D_, opts_.epoch_floor, std::size_t{1}});
  Stager stage(ctx_, key_prefix(opts_.level, 0));
  for (auto& it : items) {
    if (it.filler || it.key.ns == Namespace::kDummy) throw Error(ErrorCode::kInvalidConfig, "build items must be keyed");
    stage.add(std::move(it));
  }
  items.clear();
  for (std::size_t j = 1; j <= D_; ++j) stage.add(Item{LogicalKey::dummy(j), std::nullopt});
  stage.flush();
  accesses_ = 0;
  finish_rebuild(0, {});
  built_ = true;
}

void SquareRootOs::rebuild(const ItemTransform& first_pass) {
  PhaseScope scope(ctx_.store(), Phase::kRebuild);
  Stager stage(ctx_, key_prefix(opts_.level, 0));
  cache_.drain(stage, j_ - 1);
  stage.flush();
  finish_rebuild(stage.count(), first_pass);
}

void SquareRootOs::finish_rebuild(std::size_t staged, const ItemTransform& first_pass) {
  const std::size_t total = n_ + D_ - accesses_ + staged;
  std::uint8_t phase = run_shuffle(ctx_, opts_.level, total, opts_.shuffle, first_pass);
  RekeyResult res = rekey_pass(ctx_, opts_.level, phase, total, fresh_nonce(ctx_.rng()));
  if (res.written != n_ + D_) {
    throw Error(ErrorCode::kCountMismatch,
                "rebuild wrote " + std::to_string(res.written) + ", expected " + std::to_string(n_ + D_));
  }
  r_ = res.nonce;
  j_ = 1;
  accesses_ = 0;
  ++epochs_;
}

void SquareRootOs::access_round(const std::vector<std::optional<LogicalKey>>& keys, const Body& body) {
  if (!built_) throw Error(ErrorCode::kInvalidConfig, "access before build");
  if (broken_) throw Error(ErrorCode::kInvalidConfig, "dictionary unusable after a failed access");
  const std::size_t count = keys.size();
  if (count == 0) return;
  if (count > D_) throw Error(ErrorCode::kInvalidConfig, "access round wider than the epoch");
  if (accesses_ + count > D_) rebuild();

  std::vector<Value> values(count);
  std::vector<bool> from_server(count, false);
  std::vector<StoredKey> requested(count);
  const std::uint8_t prefix = key_prefix(opts_.level, 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::optional<Value> hit;
    if (keys[i]) hit = cache_.lookup(*keys[i]);
    if (hit) {
      values[i] = std::move(*hit);
    } else if (keys[i]) {
      from_server[i] = true;
    }
    requested[i] = from_server[i] ? ctx_.keyed(prefix, r_, *keys[i]) : ctx_.keyed(prefix, r_, LogicalKey::dummy(j_++));
  }

  MemoryHold hold(ctx_.memory(), count);
  const std::size_t m = ctx_.message_size();
  ServerStore& store = ctx_.store();
  std::vector<std::optional<Bytes>> fetched;
  fetched.reserve(count);
  for (std::size_t start = 0; start < count; start += m) {
    std::vector<Request> reqs;
    for (std::size_t i = start; i < std::min(count, start + m); ++i) reqs.push_back(Request::get(requested[i]));
    for (auto& resp : store.batch(std::move(reqs))) fetched.push_back(std::move(resp.value));
  }
  for (std::size_t start = 0; start < count; start += m) {
    std::vector<Request> reqs;
    for (std::size_t i = start; i < std::min(count, start + m); ++i) reqs.push_back(Request::remove(requested[i]));
    store.batch(std::move(reqs));
  }
  accesses_ += count;

  for (std::size_t i = 0; i < count; ++i) {
    if (!fetched[i]) {
      broken_ = true;
      throw Error(ErrorCode::kMissIntolerance, keys[i] && from_server[i] ? "key not in the dictionary"
                                                                          : "dummy item missing");
    }
    if (!from_server[i]) continue;
    Item item = ctx_.open(*fetched[i]);
    if (item.filler || !(item.key == *keys[i])) {
      broken_ = true;
      throw Error(ErrorCode::kAuthFailure, "item key mismatch");
    }
    values[i] = std::move(item.value);
  }

  body(values);

  for (std::size_t i = 0; i < count; ++i) {
    if (keys[i]) cache_.store(*keys[i], std::move(values[i]));
  }
  if (accesses_ == D_) rebuild();
}

Value SquareRootOs::access(const LogicalKey& k, std::optional<Value> new_value) {
  Value before;
  access_round({k}, [&](std::vector<Value>& v) {
    before = v[0];
    if (new_value) v[0] = std::move(*new_value);
  });
  return before;
}

}  // namespace ostore
