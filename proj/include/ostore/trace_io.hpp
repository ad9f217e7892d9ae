#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "ostore/server_store.hpp"

namespace ostore {

nlohmann::json event_to_json(const TraceEvent& ev);
TraceEvent event_from_json(const nlohmann::json& j);

void write_trace_jsonl(std::ostream& os, const std::vector<TraceEvent>& trace);
std::vector<TraceEvent> read_trace_jsonl(std::istream& is);

nlohmann::json stats_to_json(const IoStats& stats);
IoStats stats_from_json(const nlohmann::json& j);

StoredKey key_from_hex(const std::string& hex);

}  // namespace ostore
