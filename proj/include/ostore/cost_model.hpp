#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ostore/server_store.hpp"

namespace ostore {

enum class RequestKind : std::uint8_t { kGet = 0, kPut, kCopy, kDelete };
inline constexpr std::size_t kRequestKinds = 4;

std::string_view request_name(RequestKind k);
RequestKind parse_request_kind(std::string_view name);

// Per-request prices and round-trip times per item size.
struct PricingModel {
  std::array<double, kRequestKinds> price{};
  std::map<std::size_t, std::array<std::optional<double>, kRequestKinds>> rtt_ms;

  static PricingModel s3_2011();
  static PricingModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double unit_price(RequestKind k) const { return price[static_cast<std::size_t>(k)]; }
  double rtt(RequestKind k, std::size_t item_size) const;
};

// Plain requests a server op turns into: range reads become per-item gets,
// range deletes become per-item deletes.
std::array<std::uint64_t, kRequestKinds> expand_requests(const TraceEvent& ev);

struct CostEstimate {
  std::array<std::uint64_t, kRequestKinds> requests{};
  double total = 0;
};

class CostAccumulator {
 public:
  explicit CostAccumulator(const PricingModel& pricing) : pricing_(pricing) {}
  void add(const TraceEvent& ev);
  const CostEstimate& result() const { return est_; }

 private:
  const PricingModel& pricing_;
  CostEstimate est_;
};

CostEstimate estimate_cost(const std::vector<TraceEvent>& trace, const PricingModel& pricing);

struct TimeEstimate {
  double total_ms = 0;
  std::array<double, kPhaseCount> phase_ms{};
  std::uint64_t accesses = 0;
  double min_access_ms = 0;  // smallest online latency of one access
  double max_access_ms = 0;
  double amortized_ms = 0;   // (online + rebuild) / accesses
};

// A message costs the slowest of its request kinds, each kind issued
// parallel_width at a time.
class TimeAccumulator {
 public:
  TimeAccumulator(const PricingModel& pricing, std::size_t item_size, std::size_t parallel_width);
  void add(const TraceEvent& ev);
  TimeEstimate result() const;

 private:
  void close_message();

  const PricingModel& pricing_;
  std::size_t item_size_;
  std::size_t width_;
  std::optional<std::uint64_t> msg_;
  Phase phase_ = Phase::kOnline;
  std::int64_t access_ = -1;
  std::array<std::uint64_t, kRequestKinds> pending_{};
  TimeEstimate est_;
  std::map<std::int64_t, double> online_by_access_;
};

TimeEstimate estimate_time(const std::vector<TraceEvent>& trace, const PricingModel& pricing, std::size_t item_size,
                           std::size_t parallel_width);

}  // namespace ostore
