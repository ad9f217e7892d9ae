#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ostore/cache.hpp"
#include "ostore/crypto.hpp"

namespace ostore {

struct CuckooParams {
  double epsilon = 0.3;
  std::size_t stash = 4;
  std::size_t max_chain = 0;  // 0: ceil(3 * log2(capacity))
  int max_rehash = 10;
};

using CuckooEntry = std::pair<LogicalKey, Value>;

Bytes encode_cell(const std::optional<CuckooEntry>& cell);
std::optional<CuckooEntry> decode_cell(ByteView bytes);

// Cell-addressed memory. A round reads a set of distinct cells, lets the body
// rewrite them in place, and writes them all back.
class CellStore {
 public:
  using Body = std::function<void(std::vector<Bytes>&)>;
  virtual ~CellStore() = default;
  virtual std::size_t cell_count() const = 0;
  virtual void round(const std::vector<std::uint64_t>& cells, const Body& body) = 0;
};

class MemoryCellStore final : public CellStore {
 public:
  explicit MemoryCellStore(std::size_t cells, bool record = true);

  std::size_t cell_count() const override { return cells_.size(); }
  void round(const std::vector<std::uint64_t>& cells, const Body& body) override;

  const std::vector<std::vector<std::uint64_t>>& rounds() const { return rounds_; }
  const std::vector<Bytes>& contents() const { return cells_; }
  void clear_rounds() { rounds_.clear(); }
  std::size_t occupied() const;

 private:
  std::vector<Bytes> cells_;
  bool record_;
  std::vector<std::vector<std::uint64_t>> rounds_;
};

struct CuckooStats {
  std::uint64_t rounds = 0;
  std::uint64_t inserts = 0;
  std::uint64_t evictions = 0;
  std::uint64_t stash_rounds = 0;
  std::uint64_t rehashes = 0;
  std::uint64_t cell_writes = 0;
};

// Cuckoo hashing with a stash. Cells 0..t-1 are T1, t..2t-1 are T2 and
// 2t..2t+s-1 are the stash. Every get, put and remove starts with the same
// round over {T1[f1(k)], T2[f2(k)], stash...}.
class CuckooDict {
 public:
  CuckooDict(std::size_t capacity, CellStore& cells, SessionRng& rng, CuckooParams params = {});

  static std::size_t table_size(std::size_t capacity, double epsilon);
  static std::size_t cell_count(std::size_t capacity, const CuckooParams& params);

  std::optional<Value> get(const LogicalKey& k);
  void put(const LogicalKey& k, Value v);
  std::optional<Value> remove(const LogicalKey& k);

  void rehash();
  // The backing cells were wiped externally; draw new seeds and forget the contents.
  void reset_empty();

  std::uint64_t cell_f1(const LogicalKey& k) const;
  std::uint64_t cell_f2(const LogicalKey& k) const;
  std::vector<std::uint64_t> lookup_cells(const LogicalKey& k) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t table_size() const { return t_; }
  std::size_t stash_size() const { return params_.stash; }
  std::size_t max_chain() const { return max_chain_; }
  const CuckooStats& stats() const { return stats_; }
  CellStore& cells() { return *cells_; }
  // Moves the table onto another store that already holds identical cell contents.
  void rebind(CellStore& cells);

 private:
  void reseed();
  // Places an entry known to be absent. Returns it back if the stash overflowed.
  std::optional<CuckooEntry> insert_absent(CuckooEntry e);
  std::optional<CuckooEntry> evict_chain(CuckooEntry pending, bool to_t2);
  std::optional<CuckooEntry> stash_round(CuckooEntry pending);
  std::vector<CuckooEntry> scan_and_clear();
  void rehash_with(std::vector<CuckooEntry> entries);
  void run_round(const std::vector<std::uint64_t>& cells, const CellStore::Body& body);

  std::size_t capacity_;
  CellStore* cells_;
  SessionRng& rng_;
  CuckooParams params_;
  std::size_t t_;
  std::size_t max_chain_;
  SecretKey seed1_{};
  SecretKey seed2_{};
  std::size_t size_ = 0;
  CuckooStats stats_;
};

}  // namespace ostore
