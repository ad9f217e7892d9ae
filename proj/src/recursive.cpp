#include "ostore/recursive.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ostore/errors.hpp"

namespace ostore {

using nlohmann::json;

BCellStore::BCellStore(ClientContext& ctx, std::vector<Bytes> initial_cells, std::uint8_t level,
                       std::unique_ptr<CacheDict> cache, SquareRootOptions opts)
    : cells_(initial_cells.size()), level_(level), cache_(std::move(cache)) {
  opts.level = level;
  os_ = std::make_unique<SquareRootOs>(ctx, *cache_, opts);
  std::vector<Item> items;
  items.reserve(initial_cells.size());
  for (std::size_t i = 0; i < initial_cells.size(); ++i) {
    items.push_back(Item{LogicalKey::cell(level, i), std::move(initial_cells[i])});
  }
  os_->build(std::move(items));
}

void BCellStore::round(const std::vector<std::uint64_t>& cells, const Body& body) {
  std::vector<std::optional<LogicalKey>> keys;
  keys.reserve(cells.size());
  for (auto c : cells) {
    if (c >= cells_) throw Error(ErrorCode::kInvalidConfig, "cell index out of range");
    keys.emplace_back(LogicalKey::cell(level_, c));
  }
  os_->access_round(keys, [&](std::vector<Value>& values) {
    std::vector<Bytes> view;
    view.reserve(values.size());
    for (auto& v : values) view.push_back(v ? std::move(*v) : encode_cell(std::nullopt));
    body(view);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::move(view[i]);
  });
}

CuckooCache::CuckooCache(ClientContext& ctx, std::size_t capacity, std::unique_ptr<BCellStore> cells,
                         CuckooParams params)
    : cells_(std::move(cells)), dict_(capacity, *cells_, ctx.rng(), params) {}

void CuckooCache::drain(Stager& out, std::size_t dummies) {
  std::size_t next_dummy = 1;
  cells_->os().rebuild([&](Item it) -> Item {
    if (it.filler || it.key.ns != Namespace::kCell) return it;
    auto entry = it.value ? decode_cell(*it.value) : std::nullopt;
    if (entry) {
      out.add(Item{std::move(entry->first), std::move(entry->second)});
    } else if (next_dummy <= dummies) {
      out.add(Item{LogicalKey::dummy(next_dummy++), std::nullopt});
    } else {
      out.add(Item::make_filler());
    }
    it.value = encode_cell(std::nullopt);
    return it;
  });
  if (next_dummy <= dummies) throw Error(ErrorCode::kCountMismatch, "too few empty cells for the dummies");
  dict_.reset_empty();
}

std::size_t integer_root(std::size_t N, int c) {
  if (c < 1) return N;
  auto pow_le = [&](std::size_t m) {
    long double p = 1;
    for (int i = 0; i < c; ++i) p *= static_cast<long double>(m);
    return p <= static_cast<long double>(N);
  };
  auto m = static_cast<std::size_t>(std::pow(static_cast<long double>(N), 1.0L / c));
  while (m > 0 && !pow_le(m)) --m;
  while (pow_le(m + 1)) ++m;
  return m;
}

OsConfig config_from_json(const json& j) {
  try {
    OsConfig cfg;
    cfg.N = j.value("N", cfg.N);
    cfg.c = j.value("c", cfg.c);
    cfg.passes = j.value("b", cfg.passes);
    cfg.item_size = j.value("item_size", cfg.item_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.stash = j.value("stash", cfg.stash);
    cfg.message_size = j.value("message_size", cfg.message_size);
    std::string front = j.value("frontend", std::string("direct"));
    if (front == "direct") {
      cfg.frontend = Frontend::kDirect;
    } else if (front == "cuckoo") {
      cfg.frontend = Frontend::kCuckoo;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "frontend must be direct or cuckoo");
    }
    std::string strategy = j.value("shuffle", std::string("buffer"));
    if (strategy == "buffer") {
      cfg.strategy = ShuffleStrategy::kBuffer;
    } else if (strategy == "oracle") {
      cfg.strategy = ShuffleStrategy::kOracle;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "shuffle must be buffer or oracle");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
}

json config_to_json(const OsConfig& cfg) {
  return json{{"N", cfg.N},
              {"c", cfg.c},
              {"b", cfg.passes},
              {"item_size", cfg.item_size},
              {"seed", cfg.seed},
              {"epsilon", cfg.epsilon},
              {"stash", cfg.stash},
              {"message_size", cfg.message_size},
              {"frontend", cfg.frontend == Frontend::kDirect ? "direct" : "cuckoo"},
              {"shuffle", cfg.strategy == ShuffleStrategy::kBuffer ? "buffer" : "oracle"}};
}

namespace {

std::size_t checked_root(const OsConfig& cfg) {
  if (cfg.c < 2) throw Error(ErrorCode::kInvalidConfig, "c must be at least 2");
  if (cfg.N == 0) throw Error(ErrorCode::kInvalidConfig, "N must be positive");
  std::size_t m = cfg.message_size != 0 ? cfg.message_size : integer_root(cfg.N, cfg.c);
  if (m < 2) throw Error(ErrorCode::kInvalidConfig, "message size below 2");
  if (cfg.N < m * m) throw Error(ErrorCode::kInvalidConfig, "N must be at least M^2");
  return m;
}

ServerStore::Options store_options(const OsConfig& cfg, std::size_t m) {
  return ServerStore::Options{cfg.item_size, m, cfg.record_trace};
}

KeyMaterial keys_for(SessionRng& rng) { return KeyMaterial::generate(rng); }

}  // namespace

OsClient::OsClient(OsConfig cfg)
    : cfg_(cfg),
      M_(checked_root(cfg_)),
      store_(store_options(cfg_, M_)),
      ctx_(store_, [&] {
        SessionRng rng(cfg_.seed);
        return keys_for(rng);
      }(), SessionRng(cfg_.seed).derive(1)) {
  if (cfg_.passes < 1 || cfg_.passes > kMaxPhase) throw Error(ErrorCode::kInvalidConfig, "passes must be in 1..15");
  if (cfg_.c > 15) throw Error(ErrorCode::kInvalidConfig, "c must be at most 15");
}

OsClient::~OsClient() = default;

SquareRootOptions OsClient::level_options(std::uint8_t level, std::size_t floor) const {
  SquareRootOptions o;
  o.level = level;
  o.epoch_floor = floor;
  o.shuffle.passes = cfg_.passes;
  o.shuffle.strategy = cfg_.strategy;
  return o;
}

CuckooParams OsClient::cuckoo_params() const {
  CuckooParams p;
  p.epsilon = cfg_.epsilon;
  p.stash = cfg_.stash;
  return p;
}

std::unique_ptr<CacheDict> OsClient::make_cache(std::size_t capacity, std::uint8_t level) {
  if (level <= 2 || capacity <= M_) return std::make_unique<ClientCache>(capacity, &ctx_.memory());
  CuckooParams p = cuckoo_params();
  std::vector<Bytes> cells(CuckooDict::cell_count(capacity, p), encode_cell(std::nullopt));
  auto lower = make_cells(std::move(cells), static_cast<std::uint8_t>(level - 1));
  return std::make_unique<CuckooCache>(ctx_, capacity, std::move(lower), p);
}

std::unique_ptr<BCellStore> OsClient::make_cells(std::vector<Bytes> cells, std::uint8_t level) {
  const std::size_t floor = 2 + cfg_.stash;
  const std::size_t epoch = std::max((cells.size() + M_ - 1) / M_, floor);
  auto cache = make_cache(epoch, level);
  auto out = std::make_unique<BCellStore>(ctx_, std::move(cells), level, std::move(cache), level_options(level, floor));
  registry_.push_back(&out->os());
  return out;
}

void OsClient::build(std::vector<std::pair<Bytes, Bytes>> items) {
  if (built_) throw Error(ErrorCode::kInvalidConfig, "already built");
  if (items.size() > cfg_.N) throw Error(ErrorCode::kCapacityExceeded, "more items than N");
  {
    std::set<Bytes> seen;
    for (const auto& [k, v] : items) {
      if (!seen.insert(k).second) throw Error(ErrorCode::kInvalidConfig, "duplicate key in build set");
      check_value(k, v);
    }
  }
  built_ = true;
  const auto level = static_cast<std::uint8_t>(cfg_.c);

  if (cfg_.frontend == Frontend::kDirect) {
    if (items.size() <= M_) {
      degenerate_ = true;
      for (auto& [k, v] : items) local_.emplace(std::move(k), std::move(v));
      ctx_.memory().add(local_.size());
      return;
    }
    const std::size_t epoch = std::max<std::size_t>(1, (items.size() + M_ - 1) / M_);
    top_cache_ = make_cache(epoch, level);
    top_ = std::make_unique<SquareRootOs>(ctx_, *top_cache_, level_options(level, 1));
    std::vector<Item> wrapped;
    wrapped.reserve(items.size());
    for (auto& [k, v] : items) wrapped.push_back(Item{LogicalKey::real(k), std::move(v)});
    items.clear();
    top_->build(std::move(wrapped));
    registry_.push_back(top_.get());
    return;
  }

  if (cfg_.N <= M_) {
    degenerate_ = true;
    for (auto& [k, v] : items) local_.emplace(std::move(k), std::move(v));
    ctx_.memory().add(local_.size());
    return;
  }
  CuckooParams p = cuckoo_params();
  const std::size_t cells = CuckooDict::cell_count(cfg_.N, p);
  {
    MemoryCellStore staging(cells, false);
    MemoryHold hold(ctx_.memory(), cells);
    front_ = std::make_unique<CuckooDict>(cfg_.N, staging, ctx_.rng(), p);
    for (auto& [k, v] : items) front_->put(LogicalKey::real(k), std::move(v));
    items.clear();
    top_cells_ = make_cells(staging.contents(), level);
    front_->rebind(*top_cells_);
  }
}

void OsClient::check_value(ByteView key, const Bytes& value) const {
  if (value.size() > max_value_size(key.size())) {
    throw Error(ErrorCode::kPlaintextTooLarge, "value of " + std::to_string(value.size()) + " bytes exceeds " +
                                                   std::to_string(max_value_size(key.size())));
  }
}

std::size_t OsClient::max_value_size(std::size_t key_size) const {
  // A real item costs 9 + |key| bytes of framing. Each time it is wrapped into a
  // cuckoo cell and stored as a cell item, 18 more; deeper levels wrap cell items
  // into cells again at 36 per level.
  const std::size_t c = static_cast<std::size_t>(cfg_.c);
  std::size_t wraps = 0;
  if (cfg_.frontend == Frontend::kCuckoo) {
    wraps = 18 + 36 * (c - 2);
  } else if (c >= 3) {
    wraps = 18 + 36 * (c - 3);
  }
  const std::size_t overhead = kCipherOverhead + 9 + key_size + wraps;
  return cfg_.item_size > overhead ? cfg_.item_size - overhead : 0;
}

void OsClient::begin_op() {
  if (!built_) throw Error(ErrorCode::kInvalidConfig, "operation before build");
  store_.set_access_index(static_cast<std::int64_t>(ops_++));
}

std::optional<Bytes> OsClient::get(ByteView key) {
  begin_op();
  PhaseScope scope(store_, Phase::kOnline);
  Bytes k(key.begin(), key.end());
  if (degenerate_) {
    auto it = local_.find(k);
    return it == local_.end() ? std::nullopt : std::optional<Bytes>(it->second);
  }
  if (top_) return top_->access(LogicalKey::real(key));
  auto found = front_->get(LogicalKey::real(key));
  if (!found) return std::nullopt;
  return std::move(*found);
}

void OsClient::put(ByteView key, Bytes value) {
  check_value(key, value);
  begin_op();
  PhaseScope scope(store_, Phase::kOnline);
  if (degenerate_) {
    Bytes k(key.begin(), key.end());
    auto it = local_.find(k);
    if (it == local_.end()) {
      if (local_.size() >= cfg_.N) throw Error(ErrorCode::kCapacityExceeded, "dictionary full");
      local_.emplace(std::move(k), std::move(value));
      ctx_.memory().add(1);
    } else {
      it->second = std::move(value);
    }
    return;
  }
  if (top_) {
    top_->access(LogicalKey::real(key), Value(std::move(value)));
    return;
  }
  front_->put(LogicalKey::real(key), Value(std::move(value)));
}

std::optional<Bytes> OsClient::remove(ByteView key) {
  begin_op();
  PhaseScope scope(store_, Phase::kOnline);
  if (degenerate_) {
    auto it = local_.find(Bytes(key.begin(), key.end()));
    if (it == local_.end()) return std::nullopt;
    Bytes v = std::move(it->second);
    local_.erase(it);
    ctx_.memory().sub(1);
    return v;
  }
  if (top_) return top_->access(LogicalKey::real(key), Value(std::nullopt));
  auto found = front_->remove(LogicalKey::real(key));
  if (!found) return std::nullopt;
  return std::move(*found);
}

std::vector<LevelInfo> OsClient::levels() const {
  std::vector<LevelInfo> out;
  for (SquareRootOs* os : registry_) {
    LevelInfo info;
    info.level = os->level();
    info.n = os->n();
    info.epoch = os->epoch_length();
    info.server_items = os->server_items();
    if (auto* cc = dynamic_cast<CuckooCache*>(&os->cache())) {
      info.cuckoo_cache = true;
      info.cache_cells = cc->cells().cell_count();
    }
    out.push_back(info);
  }
  std::sort(out.begin(), out.end(), [](const LevelInfo& a, const LevelInfo& b) { return a.level > b.level; });
  return out;
}

std::size_t OsClient::peak_client_items() const { return ctx_.memory().peak(); }

}  // namespace ostore
