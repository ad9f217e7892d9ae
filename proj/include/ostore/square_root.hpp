#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ostore/cache.hpp"
#include "ostore/client_context.hpp"
#include "ostore/shuffle.hpp"

namespace ostore {

struct SquareRootOptions {
  std::uint8_t level = 2;
  std::size_t epoch = 0;        // D; 0 means ceil(n / M)
  std::size_t epoch_floor = 1;  // lower bound on D, so the widest access round always fits
  ShuffleConfig shuffle;
};

// Miss-intolerant dictionary: n real items plus D dummies on the server,
// fronted by a capacity-D cache, rebuilt every D accesses.
class SquareRootOs {
 public:
  using Body = std::function<void(std::vector<Value>&)>;

  SquareRootOs(ClientContext& ctx, CacheDict& cache, SquareRootOptions opts);

  void build(std::vector<Item> items);

  // Fetches every key in one get message and one remove message (split at M).
  // nullopt slots are padding and fetch a dummy. `body` sees the current
  // values, aligned with `keys`, and may rewrite them; the results are cached.
  void access_round(const std::vector<std::optional<LogicalKey>>& keys, const Body& body);

  // Returns the value before the update.
  Value access(const LogicalKey& k, std::optional<Value> new_value = std::nullopt);

  void rebuild(const ItemTransform& first_pass = {});

  std::uint8_t level() const { return opts_.level; }
  std::size_t n() const { return n_; }
  std::size_t epoch_length() const { return D_; }
  std::size_t accesses_this_epoch() const { return accesses_; }
  std::size_t dummy_counter() const { return j_; }
  std::size_t epochs_completed() const { return epochs_; }
  std::size_t server_items() const { return n_ + D_ - accesses_; }
  const Nonce& nonce() const { return r_; }
  CacheDict& cache() { return cache_; }

 private:
  void finish_rebuild(std::size_t staged, const ItemTransform& first_pass);

  ClientContext& ctx_;
  CacheDict& cache_;
  SquareRootOptions opts_;
  Nonce r_{};
  std::size_t n_ = 0;
  std::size_t D_ = 0;
  std::size_t j_ = 1;
  std::size_t accesses_ = 0;
  std::size_t epochs_ = 0;
  bool built_ = false;
  bool broken_ = false;
};

}  // namespace ostore
