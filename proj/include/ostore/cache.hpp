#pragma once

#include <cstddef>
#include <map>
#include <optional>

#include "ostore/client_context.hpp"
#include "ostore/shuffle.hpp"

namespace ostore {

// A stored value; nullopt is a tombstone.
using Value = std::optional<Bytes>;

// The per-level cache C0 in front of a square-root dictionary.
class CacheDict {
 public:
  virtual ~CacheDict() = default;

  virtual std::optional<Value> lookup(const LogicalKey& k) = 0;
  virtual void store(const LogicalKey& k, Value v) = 0;
  virtual std::size_t size() const = 0;
  // Hands every cached item, followed by dummies 1..dummies, to `out` and empties the cache.
  virtual void drain(Stager& out, std::size_t dummies) = 0;
  virtual std::size_t resident_items() const = 0;
};

class ClientCache final : public CacheDict {
 public:
  ClientCache(std::size_t capacity, MemoryMeter* meter = nullptr) : capacity_(capacity), meter_(meter) {}
  ~ClientCache() override;

  std::optional<Value> lookup(const LogicalKey& k) override;
  void store(const LogicalKey& k, Value v) override;
  std::size_t size() const override { return items_.size(); }
  void drain(Stager& out, std::size_t dummies) override;
  std::size_t resident_items() const override { return items_.size(); }

 private:
  std::size_t capacity_;
  MemoryMeter* meter_;
  std::map<LogicalKey, Value> items_;
};

}  // namespace ostore
