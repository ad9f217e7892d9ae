#include "ostore/trace_io.hpp"

#include <istream>
#include <ostream>

#include "ostore/errors.hpp"

namespace ostore {

using nlohmann::json;

StoredKey key_from_hex(const std::string& hex) {
  Bytes b = from_hex(hex);
  if (b.size() != kKeyWidth) throw Error(ErrorCode::kMalformed, "key must be 32 bytes");
  StoredKey k;
  std::copy(b.begin(), b.end(), k.begin());
  return k;
}

json event_to_json(const TraceEvent& ev) {
  json j;
  j["seq"] = ev.seq;
  j["msg"] = ev.msg;
  j["op"] = std::string(op_name(ev.op));
  j["key_hex"] = to_hex(ev.key);
  j["range_hex"] = ev.key_hi ? json(to_hex(*ev.key_hi)) : json(nullptr);
  j["items"] = ev.items;
  j["affected"] = ev.affected;
  j["phase"] = std::string(phase_name(ev.phase));
  j["access"] = ev.access;
  return j;
}

TraceEvent event_from_json(const json& j) {
  try {
    TraceEvent ev;
    ev.seq = j.at("seq").get<std::uint64_t>();
    ev.msg = j.value("msg", ev.seq);
    ev.op = parse_op_kind(j.at("op").get<std::string>());
    ev.key = key_from_hex(j.at("key_hex").get<std::string>());
    if (j.contains("range_hex") && !j["range_hex"].is_null()) {
      ev.key_hi = key_from_hex(j["range_hex"].get<std::string>());
    }
    ev.items = j.at("items").get<std::uint64_t>();
    ev.affected = j.value("affected", ev.items);
    ev.phase = parse_phase(j.value("phase", std::string("online")));
    ev.access = j.value("access", std::int64_t{-1});
    return ev;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
}

void write_trace_jsonl(std::ostream& os, const std::vector<TraceEvent>& trace) {
  for (const auto& ev : trace) os << event_to_json(ev).dump() << '\n';
}

std::vector<TraceEvent> read_trace_jsonl(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformed, e.what());
    }
    out.push_back(event_from_json(j));
  }
  return out;
}

json stats_to_json(const IoStats& stats) {
  json j;
  j["roundtrips"] = stats.roundtrips;
  j["items_transferred"] = stats.items_transferred;
  json ops;
  for (std::size_t i = 0; i < kOpKindCount; ++i) ops[std::string(op_name(static_cast<OpKind>(i)))] = stats.ops[i];
  j["ops"] = ops;
  json phases;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    phases[std::string(phase_name(static_cast<Phase>(i)))] = {{"roundtrips", stats.roundtrips_by_phase[i]},
                                                              {"items", stats.items_by_phase[i]}};
  }
  j["phases"] = phases;
  return j;
}

IoStats stats_from_json(const json& j) {
  try {
    IoStats s;
    s.roundtrips = j.at("roundtrips").get<std::uint64_t>();
    s.items_transferred = j.at("items_transferred").get<std::uint64_t>();
    if (j.contains("ops")) {
      for (std::size_t i = 0; i < kOpKindCount; ++i) {
        s.ops[i] = j["ops"].value(std::string(op_name(static_cast<OpKind>(i))), std::uint64_t{0});
      }
    }
    if (j.contains("phases")) {
      for (std::size_t i = 0; i < kPhaseCount; ++i) {
        auto name = std::string(phase_name(static_cast<Phase>(i)));
        if (!j["phases"].contains(name)) continue;
        s.roundtrips_by_phase[i] = j["phases"][name].value("roundtrips", std::uint64_t{0});
        s.items_by_phase[i] = j["phases"][name].value("items", std::uint64_t{0});
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
}

}  // namespace ostore
