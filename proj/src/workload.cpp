#include "ostore/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include "ostore/errors.hpp"
#include "ostore/trace_io.hpp"

namespace ostore {

using nlohmann::json;

std::string key_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "key%09zu", i);
  return buf;
}

std::vector<std::pair<Bytes, Bytes>> initial_items(std::size_t count) {
  std::vector<std::pair<Bytes, Bytes>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(to_bytes(key_name(i)), to_bytes("v0." + std::to_string(i)));
  return out;
}

WorkloadSpec workload_from_json(const json& j) {
  try {
    WorkloadSpec spec;
    spec.os = config_from_json(j);
    spec.accesses = j.value("accesses", spec.accesses);
    spec.loaded = j.value("loaded", spec.loaded);
    spec.zipf_s = j.value("zipf_s", spec.zipf_s);
    spec.put_fraction = j.value("put_fraction", spec.put_fraction);
    spec.remove_fraction = j.value("remove_fraction", spec.remove_fraction);
    std::string dist = j.value("distribution", std::string("uniform"));
    if (dist == "uniform") {
      spec.distribution = KeyDistribution::kUniform;
    } else if (dist == "zipf") {
      spec.distribution = KeyDistribution::kZipf;
    } else if (dist == "scripted") {
      spec.distribution = KeyDistribution::kScripted;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "distribution must be uniform, zipf or scripted");
    }
    if (j.contains("ops")) {
      for (const auto& op : j["ops"]) {
        ScriptedOp s;
        std::string kind = op.at("op").get<std::string>();
        if (kind == "get") {
          s.kind = ScriptedOp::Kind::kGet;
        } else if (kind == "put") {
          s.kind = ScriptedOp::Kind::kPut;
        } else if (kind == "remove") {
          s.kind = ScriptedOp::Kind::kRemove;
        } else {
          throw Error(ErrorCode::kUnknownOpKind, kind);
        }
        s.key = op.at("key").get<std::string>();
        s.value = op.value("value", std::string());
        spec.script.push_back(std::move(s));
      }
      spec.distribution = KeyDistribution::kScripted;
    }
    if (spec.put_fraction < 0 || spec.remove_fraction < 0 || spec.put_fraction + spec.remove_fraction > 1) {
      throw Error(ErrorCode::kInvalidConfig, "op fractions must lie in [0,1]");
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
}

json workload_to_json(const WorkloadSpec& spec) {
  json j = config_to_json(spec.os);
  j["accesses"] = spec.accesses;
  j["loaded"] = spec.loaded;
  j["distribution"] = spec.distribution == KeyDistribution::kUniform ? "uniform"
                      : spec.distribution == KeyDistribution::kZipf  ? "zipf"
                                                                     : "scripted";
  j["zipf_s"] = spec.zipf_s;
  j["put_fraction"] = spec.put_fraction;
  j["remove_fraction"] = spec.remove_fraction;
  if (!spec.script.empty()) {
    json ops = json::array();
    for (const auto& op : spec.script) {
      const char* kind = op.kind == ScriptedOp::Kind::kGet ? "get" : op.kind == ScriptedOp::Kind::kPut ? "put" : "remove";
      json o = {{"op", kind}, {"key", op.key}};
      if (op.kind == ScriptedOp::Kind::kPut) o["value"] = op.value;
      ops.push_back(std::move(o));
    }
    j["ops"] = std::move(ops);
  }
  return j;
}

std::vector<ScriptedOp> generate_ops(const WorkloadSpec& spec) {
  if (spec.distribution == KeyDistribution::kScripted) return spec.script;
  const std::size_t loaded = spec.loaded ? spec.loaded : spec.os.N;
  const std::size_t count = spec.accesses ? spec.accesses : spec.os.N;
  if (loaded == 0) throw Error(ErrorCode::kInvalidConfig, "no keys to access");
  SessionRng rng = SessionRng(spec.os.seed).derive(7);
  std::vector<double> cdf;
  if (spec.distribution == KeyDistribution::kZipf) {
    cdf.resize(loaded);
    double acc = 0;
    for (std::size_t i = 0; i < loaded; ++i) cdf[i] = acc += 1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_s);
    for (auto& x : cdf) x /= acc;
  }
  std::vector<ScriptedOp> ops;
  ops.reserve(count);
  for (std::size_t a = 0; a < count; ++a) {
    std::size_t k;
    if (cdf.empty()) {
      k = static_cast<std::size_t>(rng.uniform_below(loaded));
    } else {
      k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), rng.uniform01()) - cdf.begin());
      k = std::min(k, loaded - 1);
    }
    double u = rng.uniform01();
    ScriptedOp op;
    op.key = key_name(k);
    if (u < spec.put_fraction) {
      op.kind = ScriptedOp::Kind::kPut;
      op.value = "v" + std::to_string(a + 1) + "." + std::to_string(k);
    } else if (u < spec.put_fraction + spec.remove_fraction) {
      op.kind = ScriptedOp::Kind::kRemove;
    } else {
      op.kind = ScriptedOp::Kind::kGet;
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

namespace {

std::uint64_t fnv(std::uint64_t h, ByteView b) {
  for (auto x : b) h = (h ^ x) * 1099511628211ULL;
  return h;
}

}  // namespace

RunReport run_workload(const WorkloadSpec& spec, const RunOptions& options) {
  OsConfig cfg = spec.os;
  cfg.record_trace = false;
  OsClient client(cfg);
  for (const auto& obs : options.observers) client.store().add_observer(obs);
  const std::size_t loaded = spec.loaded ? spec.loaded : cfg.N;
  client.build(initial_items(spec.distribution == KeyDistribution::kScripted && spec.loaded == 0 ? cfg.N : loaded));

  RunReport report;
  report.config = spec.os;
  report.message_size = client.message_size();
  report.build_roundtrips = client.store().stats().roundtrips;
  ServerStore& store = client.store();
  store.reset_stats();
  store.clear_trace();

  const std::size_t width = options.parallel_width ? options.parallel_width : client.message_size();
  std::unique_ptr<CostAccumulator> cost;
  std::unique_ptr<TimeAccumulator> time;
  if (options.pricing) {
    cost = std::make_unique<CostAccumulator>(*options.pricing);
    time = std::make_unique<TimeAccumulator>(*options.pricing, options.pricing_item_size, width);
    store.add_observer([&](const TraceEvent& ev) {
      cost->add(ev);
      time->add(ev);
    });
  }
  if (options.trace_out) {
    store.add_observer([&](const TraceEvent& ev) { *options.trace_out << event_to_json(ev).dump() << '\n'; });
  }

  auto ops = generate_ops(spec);
  report.accesses = ops.size();
  report.online_min = UINT64_MAX;
  std::uint64_t digest = 1469598103934665603ULL;
  for (const auto& op : ops) {
    std::uint64_t before = store.stats().roundtrips_in(Phase::kOnline);
    Bytes key = to_bytes(op.key);
    switch (op.kind) {
      case ScriptedOp::Kind::kGet: {
        auto v = client.get(key);
        digest = fnv(digest, v ? ByteView(*v) : ByteView(to_bytes("<null>")));
        break;
      }
      case ScriptedOp::Kind::kPut:
        client.put(key, to_bytes(op.value));
        break;
      case ScriptedOp::Kind::kRemove: {
        auto v = client.remove(key);
        digest = fnv(digest, v ? ByteView(*v) : ByteView(to_bytes("<null>")));
        break;
      }
    }
    std::uint64_t online = store.stats().roundtrips_in(Phase::kOnline) - before;
    report.online_min = std::min(report.online_min, online);
    report.online_max = std::max(report.online_max, online);
  }
  if (ops.empty()) report.online_min = 0;
  report.stats = store.stats();
  const double n = ops.empty() ? 1.0 : static_cast<double>(ops.size());
  report.online_mean = static_cast<double>(report.stats.roundtrips_in(Phase::kOnline)) / n;
  report.rebuild_roundtrips = report.stats.roundtrips_in(Phase::kRebuild);
  report.amortized_roundtrips = static_cast<double>(report.stats.roundtrips) / n;
  report.amortized_items = static_cast<double>(report.stats.items_transferred) / n;
  report.server_items = store.size();
  report.peak_client_items = client.peak_client_items();
  report.levels = client.levels();
  report.result_digest = digest;
  if (cost) report.cost = cost->result();
  if (time) report.time = time->result();
  return report;
}

json RunReport::to_json() const {
  json j;
  j["config"] = config_to_json(config);
  j["message_size"] = message_size;
  j["accesses"] = accesses;
  j["build_roundtrips"] = build_roundtrips;
  j["online_roundtrips"] = {{"min", online_min}, {"max", online_max}, {"mean", online_mean}};
  j["amortized_roundtrips"] = amortized_roundtrips;
  j["amortized_items"] = amortized_items;
  j["rebuild_roundtrips"] = rebuild_roundtrips;
  j["server_items"] = server_items;
  j["peak_client_items"] = peak_client_items;
  j["stats"] = stats_to_json(stats);
  j["result_digest"] = result_digest;
  json lv = json::array();
  for (const auto& l : levels) {
    lv.push_back({{"level", l.level},
                  {"n", l.n},
                  {"epoch", l.epoch},
                  {"cache", l.cuckoo_cache ? "cuckoo" : "client"},
                  {"cache_cells", l.cache_cells},
                  {"server_items", l.server_items}});
  }
  j["levels"] = lv;
  if (cost) {
    json c;
    for (std::size_t i = 0; i < kRequestKinds; ++i) c["requests"][std::string(request_name(static_cast<RequestKind>(i)))] = cost->requests[i];
    c["total"] = cost->total;
    j["cost"] = c;
  }
  if (time) {
    j["time_ms"] = {{"total", time->total_ms},
                    {"min_access", time->min_access_ms},
                    {"max_access", time->max_access_ms},
                    {"amortized", time->amortized_ms}};
  }
  return j;
}

std::string RunReport::to_text() const {
  std::ostringstream os;
  os << "N=" << config.N << " c=" << config.c << " b=" << config.passes << " M=" << message_size
     << " accesses=" << accesses << "\n";
  os << "online roundtrips per access: min " << online_min << ", max " << online_max << ", mean " << online_mean
     << "\n";
  os << "amortized roundtrips per access: " << amortized_roundtrips << "\n";
  os << "amortized items per access: " << amortized_items << "\n";
  os << "server items: " << server_items << ", peak client items: " << peak_client_items << "\n";
  for (const auto& l : levels) {
    os << "  level " << int(l.level) << ": n=" << l.n << " D=" << l.epoch << " cache="
       << (l.cuckoo_cache ? "cuckoo(" + std::to_string(l.cache_cells) + " cells)" : std::string("client")) << "\n";
  }
  if (cost) os << "estimated cost: $" << cost->total << "\n";
  if (time) {
    os << "estimated latency: min " << time->min_access_ms << " ms, amortized " << time->amortized_ms << " ms\n";
  }
  return os.str();
}

}  // namespace ostore
