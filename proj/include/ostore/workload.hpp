#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ostore/cost_model.hpp"
#include "ostore/recursive.hpp"

namespace ostore {

enum class KeyDistribution { kUniform, kZipf, kScripted };

struct ScriptedOp {
  enum class Kind { kGet, kPut, kRemove };
  Kind kind = Kind::kGet;
  std::string key;
  std::string value;
};

struct WorkloadSpec {
  OsConfig os;
  std::size_t accesses = 0;  // 0: N
  std::size_t loaded = 0;    // 0: N
  KeyDistribution distribution = KeyDistribution::kUniform;
  double zipf_s = 1.0;
  double put_fraction = 0.5;
  double remove_fraction = 0.0;
  std::vector<ScriptedOp> script;
};

WorkloadSpec workload_from_json(const nlohmann::json& j);
nlohmann::json workload_to_json(const WorkloadSpec& spec);

std::string key_name(std::size_t i);
std::vector<std::pair<Bytes, Bytes>> initial_items(std::size_t count);
// The deterministic op sequence a spec expands to.
std::vector<ScriptedOp> generate_ops(const WorkloadSpec& spec);

struct RunOptions {
  const PricingModel* pricing = nullptr;
  std::size_t pricing_item_size = 1024;
  std::size_t parallel_width = 0;  // 0: M
  std::ostream* trace_out = nullptr;
  // Attached before the build, so they see every event of the run.
  std::vector<ServerStore::Observer> observers;
};

struct RunReport {
  OsConfig config;
  std::size_t message_size = 0;
  std::size_t accesses = 0;
  std::uint64_t build_roundtrips = 0;
  std::uint64_t online_min = 0;
  std::uint64_t online_max = 0;
  double online_mean = 0;
  double amortized_roundtrips = 0;
  double amortized_items = 0;
  std::uint64_t rebuild_roundtrips = 0;
  std::size_t server_items = 0;
  std::size_t peak_client_items = 0;
  std::vector<LevelInfo> levels;
  IoStats stats;
  std::optional<CostEstimate> cost;
  std::optional<TimeEstimate> time;
  std::uint64_t result_digest = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

RunReport run_workload(const WorkloadSpec& spec, const RunOptions& options = {});

}  // namespace ostore
