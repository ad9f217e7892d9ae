#include "ostore/cache.hpp"

#include "ostore/errors.hpp"

namespace ostore {

ClientCache::~ClientCache() {
  if (meter_) meter_->sub(items_.size());
}

std::optional<Value> ClientCache::lookup(const LogicalKey& k) {
  auto it = items_.find(k);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

void ClientCache::store(const LogicalKey& k, Value v) {
  auto it = items_.find(k);
  if (it != items_.end()) {
    it->second = std::move(v);
    return;
  }
  if (items_.size() >= capacity_) throw Error(ErrorCode::kCacheOverflow, "client cache full");
  items_.emplace(k, std::move(v));
  if (meter_) meter_->add(1);
}

void ClientCache::drain(Stager& out, std::size_t dummies) {
  for (auto& [k, v] : items_) out.add(Item{k, std::move(v)});
  if (meter_) meter_->sub(items_.size());
  items_.clear();
  for (std::size_t j = 1; j <= dummies; ++j) out.add(Item{LogicalKey::dummy(j), std::nullopt});
}

}  // namespace ostore
