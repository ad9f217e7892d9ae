#include "ostore/server_store.hpp"

#include <algorithm>

#include "ostore/errors.hpp"

namespace ostore {

namespace {

constexpr std::string_view kOpNames[kOpKindCount] = {"get", "put", "remove", "getRange", "removeRange"};
constexpr std::string_view kPhaseNames[kPhaseCount] = {"build", "online", "rebuild"};

std::size_t idx(OpKind k) { return static_cast<std::size_t>(k); }
std::size_t idx(Phase p) { return static_cast<std::size_t>(p); }

}  // namespace

std::string_view op_name(OpKind kind) { return kOpNames[idx(kind)]; }

OpKind parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < kOpKindCount; ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  throw Error(ErrorCode::kUnknownOpKind, std::string(name));
}

std::string_view phase_name(Phase phase) { return kPhaseNames[idx(phase)]; }

Phase parse_phase(std::string_view name) {
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    if (kPhaseNames[i] == name) return static_cast<Phase>(i);
  }
  throw Error(ErrorCode::kMalformed, "unknown phase " + std::string(name));
}

ServerStore::ServerStore(Options options) : options_(options) {
  if (options_.item_size == 0 || options_.message_size == 0) {
    throw Error(ErrorCode::kInvalidConfig, "item_size and message_size must be positive");
  }
}

void ServerStore::reset_stats() { stats_ = IoStats{}; }

std::size_t ServerStore::count_in_range(const StoredKey& lo, const StoredKey& hi) const {
  if (hi < lo) return 0;
  return static_cast<std::size_t>(std::distance(items_.lower_bound(lo), items_.upper_bound(hi)));
}

std::size_t ServerStore::budget(const Request& r) const {
  switch (r.kind) {
    case OpKind::kGet:
    case OpKind::kPut:
      return 1;
    case OpKind::kGetRange:
      return r.limit;
    case OpKind::kRemove:
    case OpKind::kRemoveRange:
      return 0;
  }
  return 0;
}

void ServerStore::record(TraceEvent event) {
  event.seq = next_seq_++;
  event.phase = phase_;
  event.access = access_;
  stats_.ops[idx(event.op)] += 1;
  for (auto& obs : observers_) obs(event);
  if (options_.record_trace) trace_.push_back(std::move(event));
}

std::vector<std::pair<StoredKey, Bytes>> ServerStore::collect_range(const StoredKey& lo, const StoredKey& hi,
                                                                    std::size_t m) const {
  std::vector<std::pair<StoredKey, Bytes>> out;
  for (auto it = items_.lower_bound(lo); it != items_.end() && !(hi < it->first) && out.size() < m; ++it) {
    out.emplace_back(it->first, it->second);
  }
  return out;
}

Response ServerStore::apply(Request& r, std::uint64_t msg) {
  Response resp;
  TraceEvent ev;
  ev.msg = msg;
  ev.op = r.kind;
  ev.key = r.key;
  switch (r.kind) {
    case OpKind::kGet: {
      auto it = items_.find(r.key);
      if (it != items_.end()) resp.value = it->second;
      ev.items = ev.affected = resp.value ? 1 : 0;
      break;
    }
    case OpKind::kPut: {
      auto [it, inserted] = items_.insert_or_assign(r.key, std::move(r.value));
      resp.replaced = !inserted;
      ev.items = ev.affected = 1;
      break;
    }
    case OpKind::kRemove: {
      auto it = items_.find(r.key);
      if (it != items_.end()) {
        resp.value = std::move(it->second);
        items_.erase(it);
        ev.affected = 1;
      }
      break;
    }
    case OpKind::kGetRange: {
      ev.key_hi = r.key_hi;
      resp.items = collect_range(r.key, r.key_hi, r.limit);
      ev.items = ev.affected = resp.items.size();
      break;
    }
    case OpKind::kRemoveRange: {
      ev.key_hi = r.key_hi;
      auto first = items_.lower_bound(r.key);
      auto last = items_.upper_bound(r.key_hi);
      resp.removed = static_cast<std::size_t>(std::distance(first, last));
      items_.erase(first, last);
      ev.affected = resp.removed;
      break;
    }
  }
  stats_.items_transferred += ev.items;
  stats_.items_by_phase[idx(phase_)] += ev.items;
  record(std::move(ev));
  return resp;
}

std::vector<Response> ServerStore::batch(std::vector<Request> requests) {
  if (requests.empty()) return {};
  std::size_t total = 0;
  for (const auto& r : requests) {
    if (r.kind == OpKind::kPut && r.value.size() != options_.item_size) {
      throw Error(ErrorCode::kWrongItemSize,
                  "value of " + std::to_string(r.value.size()) + " bytes, expected " +
                      std::to_string(options_.item_size));
    }
    if ((r.kind == OpKind::kGetRange || r.kind == OpKind::kRemoveRange) && r.key_hi < r.key) {
      throw Error(ErrorCode::kInvalidRange, "k1 > k2");
    }
    total += budget(r);
  }
  if (total > options_.message_size) {
    throw Error(ErrorCode::kMessageTooLarge,
                std::to_string(total) + " items exceed M=" + std::to_string(options_.message_size));
  }
  std::uint64_t msg = next_msg_++;
  stats_.roundtrips += 1;
  stats_.roundtrips_by_phase[idx(phase_)] += 1;
  std::vector<Response> out;
  out.reserve(requests.size());
  for (auto& r : requests) out.push_back(apply(r, msg));
  return out;
}

std::optional<Bytes> ServerStore::get(const StoredKey& key) {
  auto resp = batch({Request::get(key)});
  return std::move(resp[0].value);
}

bool ServerStore::put(const StoredKey& key, Bytes value) {
  auto resp = batch({Request::put(key, std::move(value))});
  return resp[0].replaced;
}

std::optional<Bytes> ServerStore::remove(const StoredKey& key) {
  auto resp = batch({Request::remove(key)});
  return std::move(resp[0].value);
}

std::vector<std::pair<StoredKey, Bytes>> ServerStore::get_range(const StoredKey& lo, const StoredKey& hi,
                                                                std::size_t m) {
  if (hi < lo) throw Error(ErrorCode::kInvalidRange, "k1 > k2");
  Request r = Request::get_range(lo, hi, m);
  std::uint64_t msg = next_msg_++;
  Response resp = apply(r, msg);
  std::uint64_t slots = std::max<std::uint64_t>(
      1, (resp.items.size() + options_.message_size - 1) / options_.message_size);
  stats_.roundtrips += slots;
  stats_.roundtrips_by_phase[idx(phase_)] += slots;
  return std::move(resp.items);
}

std::size_t ServerStore::remove_range(const StoredKey& lo, const StoredKey& hi) {
  auto resp = batch({Request::remove_range(lo, hi)});
  return resp[0].removed;
}

}  // namespace ostore
