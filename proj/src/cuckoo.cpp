#include "ostore/cuckoo.hpp"

#include <cmath>

#include "ostore/errors.hpp"

namespace ostore {

Bytes encode_cell(const std::optional<CuckooEntry>& cell) {
  ByteWriter w;
  if (!cell) {
    w.u8(0);
    return w.take();
  }
  Bytes key = cell->first.encode();
  w.u8(1);
  w.u16(static_cast<std::uint16_t>(key.size()));
  w.raw(key);
  w.u8(cell->second ? 1 : 0);
  const Bytes empty;
  const Bytes& v = cell->second ? *cell->second : empty;
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.raw(v);
  return w.take();
}

std::optional<CuckooEntry> decode_cell(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() == 0) return std::nullopt;
  std::uint16_t klen = r.u16();
  LogicalKey key = LogicalKey::decode(r.raw(klen));
  bool has_value = r.u8() != 0;
  std::uint32_t vlen = r.u32();
  ByteView v = r.raw(vlen);
  Value value;
  if (has_value) value = Bytes(v.begin(), v.end());
  return CuckooEntry{std::move(key), std::move(value)};
}

MemoryCellStore::MemoryCellStore(std::size_t cells, bool record)
    : cells_(cells, encode_cell(std::nullopt)), record_(record) {}

void MemoryCellStore::round(const std::vector<std::uint64_t>& cells, const Body& body) {
  std::vector<Bytes> view;
  view.reserve(cells.size());
  for (auto c : cells) view.push_back(cells_.at(c));
  body(view);
  for (std::size_t i = 0; i < cells.size(); ++i) cells_[cells[i]] = std::move(view[i]);
  if (record_) rounds_.push_back(cells);
}

std::size_t MemoryCellStore::occupied() const {
  std::size_t n = 0;
  for (const auto& c : cells_) n += decode_cell(c) ? 1 : 0;
  return n;
}

std::size_t CuckooDict::table_size(std::size_t capacity, double epsilon) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((1.0 + epsilon) * static_cast<double>(capacity))));
}

std::size_t CuckooDict::cell_count(std::size_t capacity, const CuckooParams& params) {
  return 2 * table_size(capacity, params.epsilon) + params.stash;
}

CuckooDict::CuckooDict(std::size_t capacity, CellStore& cells, SessionRng& rng, CuckooParams params)
    : capacity_(capacity), cells_(&cells), rng_(rng), params_(params), t_(table_size(capacity, params.epsilon)) {
  if (params_.epsilon <= 0) throw Error(ErrorCode::kInvalidConfig, "epsilon must be positive");
  if (cells_->cell_count() != cell_count(capacity, params_)) {
    throw Error(ErrorCode::kInvalidConfig, "cell store has " + std::to_string(cells_->cell_count()) +
                                               " cells, layout needs " +
                                               std::to_string(cell_count(capacity, params_)));
  }
  max_chain_ = params_.max_chain != 0
                   ? params_.max_chain
                   : static_cast<std::size_t>(std::ceil(3.0 * std::log2(std::max<double>(2.0, capacity))));
  reseed();
}

void CuckooDict::reseed() {
  rng_.fill(seed1_);
  rng_.fill(seed2_);
}

void CuckooDict::rebind(CellStore& cells) {
  if (cells.cell_count() != cells_->cell_count()) throw Error(ErrorCode::kInvalidConfig, "cell count differs");
  cells_ = &cells;
}

void CuckooDict::reset_empty() {
  reseed();
  size_ = 0;
}

std::uint64_t CuckooDict::cell_f1(const LogicalKey& k) const { return keyed_hash64(seed1_, k.encode()) % t_; }

std::uint64_t CuckooDict::cell_f2(const LogicalKey& k) const { return t_ + keyed_hash64(seed2_, k.encode()) % t_; }

std::vector<std::uint64_t> CuckooDict::lookup_cells(const LogicalKey& k) const {
  std::vector<std::uint64_t> cells{cell_f1(k), cell_f2(k)};
  for (std::size_t i = 0; i < params_.stash; ++i) cells.push_back(2 * t_ + i);
  return cells;
}

void CuckooDict::run_round(const std::vector<std::uint64_t>& cells, const CellStore::Body& body) {
  ++stats_.rounds;
  cells_->round(cells, body);
}

std::optional<Value> CuckooDict::get(const LogicalKey& k) {
  std::optional<Value> out;
  run_round(lookup_cells(k), [&](std::vector<Bytes>& cells) {
    for (const auto& c : cells) {
      auto e = decode_cell(c);
      if (e && e->first == k) {
        out = std::move(e->second);
        return;
      }
    }
  });
  return out;
}

std::optional<Value> CuckooDict::remove(const LogicalKey& k) {
  std::optional<Value> out;
  run_round(lookup_cells(k), [&](std::vector<Bytes>& cells) {
    for (auto& c : cells) {
      auto e = decode_cell(c);
      if (e && e->first == k) {
        out = std::move(e->second);
        c = encode_cell(std::nullopt);
        return;
      }
    }
  });
  if (out) {
    --size_;
    ++stats_.cell_writes;
  }
  return out;
}

void CuckooDict::put(const LogicalKey& k, Value v) {
  bool found = false;
  bool full = false;
  std::optional<CuckooEntry> pending;
  run_round(lookup_cells(k), [&](std::vector<Bytes>& cells) {
    for (auto& c : cells) {
      auto e = decode_cell(c);
      if (e && e->first == k) {
        c = encode_cell(CuckooEntry{k, v});
        found = true;
        return;
      }
    }
    if (size_ >= capacity_) {
      full = true;
      return;
    }
    if (!decode_cell(cells[0])) {
      cells[0] = encode_cell(CuckooEntry{k, v});
    } else if (!decode_cell(cells[1])) {
      cells[1] = encode_cell(CuckooEntry{k, v});
    } else {
      pending = decode_cell(cells[0]);
      cells[0] = encode_cell(CuckooEntry{k, v});
    }
  });
  if (full) throw Error(ErrorCode::kCapacityExceeded, "cuckoo table holds " + std::to_string(capacity_) + " items");
  ++stats_.cell_writes;
  if (found) return;
  ++size_;
  ++stats_.inserts;
  if (!pending) return;
  if (auto overflow = evict_chain(std::move(*pending), true)) {
    auto entries = scan_and_clear();
    entries.push_back(std::move(*overflow));
    rehash_with(std::move(entries));
  }
}

std::optional<CuckooEntry> CuckooDict::insert_absent(CuckooEntry e) {
  std::optional<CuckooEntry> pending;
  run_round(lookup_cells(e.first), [&](std::vector<Bytes>& cells) {
    if (!decode_cell(cells[0])) {
      cells[0] = encode_cell(e);
    } else if (!decode_cell(cells[1])) {
      cells[1] = encode_cell(e);
    } else {
      pending = decode_cell(cells[0]);
      cells[0] = encode_cell(e);
    }
  });
  ++stats_.cell_writes;
  if (!pending) return std::nullopt;
  return evict_chain(std::move(*pending), true);
}

std::optional<CuckooEntry> CuckooDict::evict_chain(CuckooEntry pending, bool to_t2) {
  for (std::size_t steps = 0; steps < max_chain_; ++steps) {
    std::uint64_t cell = to_t2 ? cell_f2(pending.first) : cell_f1(pending.first);
    std::optional<CuckooEntry> displaced;
    run_round({cell}, [&](std::vector<Bytes>& cells) {
      displaced = decode_cell(cells[0]);
      cells[0] = encode_cell(pending);
    });
    ++stats_.evictions;
    ++stats_.cell_writes;
    if (!displaced) return std::nullopt;
    pending = std::move(*displaced);
    to_t2 = !to_t2;
  }
  return stash_round(std::move(pending));
}

std::optional<CuckooEntry> CuckooDict::stash_round(CuckooEntry pending) {
  std::vector<std::uint64_t> cells;
  for (std::size_t i = 0; i < params_.stash; ++i) cells.push_back(2 * t_ + i);
  bool placed = false;
  ++stats_.stash_rounds;
  if (!cells.empty()) {
    run_round(cells, [&](std::vector<Bytes>& view) {
      for (auto& c : view) {
        if (!decode_cell(c)) {
          c = encode_cell(pending);
          placed = true;
          return;
        }
      }
    });
  }
  if (placed) {
    ++stats_.cell_writes;
    return std::nullopt;
  }
  return pending;
}

std::vector<CuckooEntry> CuckooDict::scan_and_clear() {
  std::vector<CuckooEntry> out;
  const std::size_t total = cells_->cell_count();
  const std::size_t chunk = 2 + params_.stash;
  for (std::size_t start = 0; start < total; start += chunk) {
    std::vector<std::uint64_t> cells;
    for (std::size_t c = start; c < std::min(total, start + chunk); ++c) cells.push_back(c);
    run_round(cells, [&](std::vector<Bytes>& view) {
      for (auto& c : view) {
        if (auto e = decode_cell(c)) out.push_back(std::move(*e));
        c = encode_cell(std::nullopt);
      }
    });
  }
  return out;
}

void CuckooDict::rehash() { rehash_with(scan_and_clear()); }

void CuckooDict::rehash_with(std::vector<CuckooEntry> entries) {
  for (int attempt = 0; attempt < params_.max_rehash; ++attempt) {
    reseed();
    ++stats_.rehashes;
    std::optional<CuckooEntry> failed;
    std::size_t placed = 0;
    for (; placed < entries.size(); ++placed) {
      failed = insert_absent(entries[placed]);
      if (failed) break;
    }
    if (!failed) return;
    auto again = scan_and_clear();
    again.push_back(std::move(*failed));
    for (std::size_t i = placed + 1; i < entries.size(); ++i) again.push_back(std::move(entries[i]));
    entries = std::move(again);
  }
  throw Error(ErrorCode::kRehashLoop, "no stable placement after " + std::to_string(params_.max_rehash) + " rehashes");
}

}  // namespace ostore
