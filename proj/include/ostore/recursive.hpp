#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ostore/cache.hpp"
#include "ostore/cuckoo.hpp"
#include "ostore/square_root.hpp"

namespace ostore {

// The cells of a cuckoo table, held as the items of a square-root dictionary.
class BCellStore final : public CellStore {
 public:
  BCellStore(ClientContext& ctx, std::vector<Bytes> initial_cells, std::uint8_t level,
             std::unique_ptr<CacheDict> cache, SquareRootOptions opts);

  std::size_t cell_count() const override { return cells_; }
  void round(const std::vector<std::uint64_t>& cells, const Body& body) override;

  SquareRootOs& os() { return *os_; }
  const SquareRootOs& os() const { return *os_; }
  CacheDict& cache() { return *cache_; }

 private:
  std::size_t cells_;
  std::uint8_t level_;
  std::unique_ptr<CacheDict> cache_;
  std::unique_ptr<SquareRootOs> os_;
};

// Miss-tolerant cache of capacity D over a lower square-root level.
class CuckooCache final : public CacheDict {
 public:
  CuckooCache(ClientContext& ctx, std::size_t capacity, std::unique_ptr<BCellStore> cells, CuckooParams params);

  std::optional<Value> lookup(const LogicalKey& k) override { return dict_.get(k); }
  void store(const LogicalKey& k, Value v) override { dict_.put(k, std::move(v)); }
  std::size_t size() const override { return dict_.size(); }
  // Rebuilds the lower level; its first shuffle pass empties every cell and
  // emits one item per cell: the cached item, a dummy, or a filler.
  void drain(Stager& out, std::size_t dummies) override;
  std::size_t resident_items() const override { return cells_->cache().resident_items(); }

  CuckooDict& dict() { return dict_; }
  BCellStore& cells() { return *cells_; }

 private:
  std::unique_ptr<BCellStore> cells_;
  CuckooDict dict_;
};

enum class Frontend { kDirect, kCuckoo };

struct OsConfig {
  std::size_t N = 10000;
  int c = 2;
  std::size_t passes = 4;
  std::size_t item_size = 1024;
  std::uint64_t seed = 1;
  double epsilon = 0.3;
  std::size_t stash = 4;
  std::size_t message_size = 0;  // 0: floor(N^(1/c))
  Frontend frontend = Frontend::kDirect;
  ShuffleStrategy strategy = ShuffleStrategy::kBuffer;
  bool record_trace = true;
};

OsConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const OsConfig& cfg);

// Largest m with m^c <= N.
std::size_t integer_root(std::size_t N, int c);

struct LevelInfo {
  std::uint8_t level = 0;
  std::size_t n = 0;               // items in the level's dictionary (excluding dummies)
  std::size_t epoch = 0;           // D: dummies and cache capacity
  bool cuckoo_cache = false;
  std::size_t cache_cells = 0;     // 2t+s when the cache is a cuckoo table
  std::size_t server_items = 0;    // currently on the server for this level
};

// Client of the full construction. kDirect puts a miss-intolerant B_c(N)
// directly over the loaded keys: every key touched must have been loaded, and
// remove leaves a tombstone. kCuckoo wraps B_c in a cuckoo table for full
// dictionary semantics.
class OsClient {
 public:
  explicit OsClient(OsConfig cfg);
  ~OsClient();

  void build(std::vector<std::pair<Bytes, Bytes>> items);

  std::optional<Bytes> get(ByteView key);
  void put(ByteView key, Bytes value);
  std::optional<Bytes> remove(ByteView key);

  ServerStore& store() { return store_; }
  const ServerStore& store() const { return store_; }
  ClientContext& context() { return ctx_; }
  const OsConfig& config() const { return cfg_; }
  std::size_t message_size() const { return M_; }
  std::size_t max_value_size(std::size_t key_size) const;
  bool degenerate() const { return degenerate_; }
  std::uint64_t operations() const { return ops_; }

  std::vector<LevelInfo> levels() const;
  std::size_t peak_client_items() const;

 private:
  std::unique_ptr<CacheDict> make_cache(std::size_t capacity, std::uint8_t level);
  std::unique_ptr<BCellStore> make_cells(std::vector<Bytes> cells, std::uint8_t level);
  SquareRootOptions level_options(std::uint8_t level, std::size_t floor) const;
  CuckooParams cuckoo_params() const;
  void check_value(ByteView key, const Bytes& value) const;
  void begin_op();

  OsConfig cfg_;
  std::size_t M_;
  ServerStore store_;
  ClientContext ctx_;
  bool degenerate_ = false;
  bool built_ = false;
  std::uint64_t ops_ = 0;
  std::map<Bytes, Bytes> local_;

  std::unique_ptr<CacheDict> top_cache_;
  std::unique_ptr<SquareRootOs> top_;
  std::unique_ptr<BCellStore> top_cells_;
  std::unique_ptr<CuckooDict> front_;

  std::vector<SquareRootOs*> registry_;
};

}  // namespace ostore
