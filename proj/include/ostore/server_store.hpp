#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ostore/bytes.hpp"

namespace ostore {

inline constexpr std::size_t kKeyWidth = 32;

// Fixed-width server key, ordered byte-wise.
using StoredKey = std::array<std::uint8_t, kKeyWidth>;

enum class OpKind : std::uint8_t { kGet = 0, kPut, kRemove, kGetRange, kRemoveRange };
inline constexpr std::size_t kOpKindCount = 5;

std::string_view op_name(OpKind kind);
OpKind parse_op_kind(std::string_view name);

// Client-side accounting label attached to each roundtrip. The server never sees it.
enum class Phase : std::uint8_t { kBuild = 0, kOnline, kRebuild };
inline constexpr std::size_t kPhaseCount = 3;

std::string_view phase_name(Phase phase);
Phase parse_phase(std::string_view name);

struct Request {
  OpKind kind = OpKind::kGet;
  StoredKey key{};
  StoredKey key_hi{};
  std::size_t limit = 0;
  Bytes value;

  static Request get(const StoredKey& k) { return {OpKind::kGet, k, {}, 0, {}}; }
  static Request put(const StoredKey& k, Bytes v) { return {OpKind::kPut, k, {}, 0, std::move(v)}; }
  static Request remove(const StoredKey& k) { return {OpKind::kRemove, k, {}, 0, {}}; }
  static Request get_range(const StoredKey& lo, const StoredKey& hi, std::size_t m) {
    return {OpKind::kGetRange, lo, hi, m, {}};
  }
  static Request remove_range(const StoredKey& lo, const StoredKey& hi) {
    return {OpKind::kRemoveRange, lo, hi, 0, {}};
  }
};

struct Response {
  std::optional<Bytes> value;                        // get, remove
  std::vector<std::pair<StoredKey, Bytes>> items;    // get_range
  bool replaced = false;                             // put: an item with this key already existed
  std::size_t removed = 0;                           // remove_range
};

// One server-visible primitive operation. `items` is what crossed the wire,
// `affected` is how many stored items the operation touched.
struct TraceEvent {
  std::uint64_t seq = 0;
  std::uint64_t msg = 0;
  OpKind op = OpKind::kGet;
  StoredKey key{};
  std::optional<StoredKey> key_hi;
  std::uint64_t items = 0;
  std::uint64_t affected = 0;
  Phase phase = Phase::kOnline;
  std::int64_t access = -1;
};

struct IoStats {
  std::uint64_t roundtrips = 0;
  std::uint64_t items_transferred = 0;
  std::array<std::uint64_t, kOpKindCount> ops{};
  std::array<std::uint64_t, kPhaseCount> roundtrips_by_phase{};
  std::array<std::uint64_t, kPhaseCount> items_by_phase{};

  std::uint64_t count(OpKind k) const { return ops[static_cast<std::size_t>(k)]; }
  std::uint64_t roundtrips_in(Phase p) const { return roundtrips_by_phase[static_cast<std::size_t>(p)]; }
  std::uint64_t items_in(Phase p) const { return items_by_phase[static_cast<std::size_t>(p)]; }
};

// In-memory model of the honest-but-curious server: an ordered key-value
// map behind the five-operation API, with every message size-checked,
// counted and logged.
class ServerStore {
 public:
  struct Options {
    std::size_t item_size = 1024;
    std::size_t message_size = 100;
    bool record_trace = true;
  };

  using Observer = std::function<void(const TraceEvent&)>;

  explicit ServerStore(Options options);

  // One message: all requests applied in order, one roundtrip.
  std::vector<Response> batch(std::vector<Request> requests);

  std::optional<Bytes> get(const StoredKey& key);
  bool put(const StoredKey& key, Bytes value);
  std::optional<Bytes> remove(const StoredKey& key);
  // Served as ceil(result/M) roundtrips (at least one).
  std::vector<std::pair<StoredKey, Bytes>> get_range(const StoredKey& lo, const StoredKey& hi, std::size_t m);
  std::size_t remove_range(const StoredKey& lo, const StoredKey& hi);

  const IoStats& stats() const { return stats_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  void reset_stats();
  void clear_trace() { trace_.clear(); }
  void add_observer(Observer observer) { observers_.push_back(std::move(observer)); }

  void set_phase(Phase phase) { phase_ = phase; }
  Phase phase() const { return phase_; }
  void set_access_index(std::int64_t index) { access_ = index; }

  std::size_t item_size() const { return options_.item_size; }
  std::size_t message_size() const { return options_.message_size; }

  // Audit helpers; they bypass the message layer and are not counted.
  std::size_t size() const { return items_.size(); }
  std::size_t count_in_range(const StoredKey& lo, const StoredKey& hi) const;
  bool contains(const StoredKey& key) const { return items_.count(key) != 0; }

 private:
  std::size_t budget(const Request& r) const;
  Response apply(Request& r, std::uint64_t msg);
  void record(TraceEvent event);
  std::vector<std::pair<StoredKey, Bytes>> collect_range(const StoredKey& lo, const StoredKey& hi,
                                                         std::size_t m) const;

  Options options_;
  std::map<StoredKey, Bytes> items_;
  IoStats stats_;
  std::vector<TraceEvent> trace_;
  std::vector<Observer> observers_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_msg_ = 0;
  Phase phase_ = Phase::kOnline;
  std::int64_t access_ = -1;
};

// Sets the accounting phase for a scope and restores the previous one.
class PhaseScope {
 public:
  PhaseScope(ServerStore& store, Phase phase) : store_(store), saved_(store.phase()) { store_.set_phase(phase); }
  ~PhaseScope() { store_.set_phase(saved_); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  ServerStore& store_;
  Phase saved_;
};

}  // namespace ostore
