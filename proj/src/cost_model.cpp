#include "ostore/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include "ostore/errors.hpp"

namespace ostore {

using nlohmann::json;

namespace {

constexpr std::string_view kRequestNames[kRequestKinds] = {"get", "put", "copy", "delete"};

std::size_t idx(RequestKind k) { return static_cast<std::size_t>(k); }

}  // namespace

std::string_view request_name(RequestKind k) { return kRequestNames[idx(k)]; }

RequestKind parse_request_kind(std::string_view name) {
  for (std::size_t i = 0; i < kRequestKinds; ++i) {
    if (kRequestNames[i] == name) return static_cast<RequestKind>(i);
  }
  throw Error(ErrorCode::kUnknownOpKind, std::string(name));
}

PricingModel PricingModel::s3_2011() {
  PricingModel p;
  p.price = {0.01 / 10000, 0.01 / 1000, 0.0, 0.0};
  p.rtt_ms[1024] = {36.0, 65.0, 70.0, 31.0};
  p.rtt_ms[65536] = {56.0, 86.0, 88.0, 35.0};
  return p;
}

PricingModel PricingModel::from_json(const json& j) {
  try {
    PricingModel p;
    for (const auto& [name, v] : j.at("price").items()) p.price[idx(parse_request_kind(name))] = v.get<double>();
    for (const auto& [size, row] : j.at("rtt_ms").items()) {
      auto& entry = p.rtt_ms[static_cast<std::size_t>(std::stoull(size))];
      for (const auto& [name, v] : row.items()) entry[idx(parse_request_kind(name))] = v.get<double>();
    }
    for (double x : p.price) {
      if (x < 0) throw Error(ErrorCode::kInvalidConfig, "negative price");
    }
    for (const auto& [size, row] : p.rtt_ms) {
      for (const auto& v : row) {
        if (v && *v <= 0) throw Error(ErrorCode::kInvalidConfig, "rtt must be positive");
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::kInvalidConfig, "item size keys must be integers");
  }
}

json PricingModel::to_json() const {
  json j;
  for (std::size_t i = 0; i < kRequestKinds; ++i) j["price"][std::string(kRequestNames[i])] = price[i];
  for (const auto& [size, row] : rtt_ms) {
    for (std::size_t i = 0; i < kRequestKinds; ++i) {
      if (row[i]) j["rtt_ms"][std::to_string(size)][std::string(kRequestNames[i])] = *row[i];
    }
  }
  return j;
}

double PricingModel::rtt(RequestKind k, std::size_t item_size) const {
  auto it = rtt_ms.find(item_size);
  if (it == rtt_ms.end() || !it->second[idx(k)]) {
    throw Error(ErrorCode::kMissingRttEntry,
                std::string(request_name(k)) + " at item size " + std::to_string(item_size));
  }
  return *it->second[idx(k)];
}

std::array<std::uint64_t, kRequestKinds> expand_requests(const TraceEvent& ev) {
  std::array<std::uint64_t, kRequestKinds> r{};
  switch (ev.op) {
    case OpKind::kGet:
      r[idx(RequestKind::kGet)] = 1;
      break;
    case OpKind::kPut:
      r[idx(RequestKind::kPut)] = 1;
      break;
    case OpKind::kRemove:
      r[idx(RequestKind::kDelete)] = 1;
      break;
    case OpKind::kGetRange:
      r[idx(RequestKind::kGet)] = std::max<std::uint64_t>(1, ev.items);
      break;
    case OpKind::kRemoveRange:
      r[idx(RequestKind::kDelete)] = std::max<std::uint64_t>(1, ev.affected);
      break;
  }
  return r;
}

void CostAccumulator::add(const TraceEvent& ev) {
  auto r = expand_requests(ev);
  for (std::size_t i = 0; i < kRequestKinds; ++i) {
    est_.requests[i] += r[i];
    est_.total += static_cast<double>(r[i]) * pricing_.price[i];
  }
}

CostEstimate estimate_cost(const std::vector<TraceEvent>& trace, const PricingModel& pricing) {
  CostAccumulator acc(pricing);
  for (const auto& ev : trace) acc.add(ev);
  return acc.result();
}

TimeAccumulator::TimeAccumulator(const PricingModel& pricing, std::size_t item_size, std::size_t parallel_width)
    : pricing_(pricing), item_size_(item_size), width_(std::max<std::size_t>(1, parallel_width)) {}

void TimeAccumulator::close_message() {
  if (!msg_) return;
  double t = 0;
  for (std::size_t i = 0; i < kRequestKinds; ++i) {
    if (pending_[i] == 0) continue;
    double slots = std::ceil(static_cast<double>(pending_[i]) / static_cast<double>(width_));
    t = std::max(t, slots * pricing_.rtt(static_cast<RequestKind>(i), item_size_));
  }
  est_.total_ms += t;
  est_.phase_ms[static_cast<std::size_t>(phase_)] += t;
  if (phase_ == Phase::kOnline && access_ >= 0) online_by_access_[access_] += t;
  pending_.fill(0);
  msg_.reset();
}

void TimeAccumulator::add(const TraceEvent& ev) {
  if (!msg_ || *msg_ != ev.msg) {
    close_message();
    msg_ = ev.msg;
    phase_ = ev.phase;
    access_ = ev.access;
  }
  auto r = expand_requests(ev);
  for (std::size_t i = 0; i < kRequestKinds; ++i) pending_[i] += r[i];
}

TimeEstimate TimeAccumulator::result() const {
  TimeAccumulator copy = *this;
  copy.close_message();
  TimeEstimate est = copy.est_;
  est.accesses = copy.online_by_access_.size();
  if (est.accesses > 0) {
    est.min_access_ms = est.max_access_ms = copy.online_by_access_.begin()->second;
    for (const auto& [a, t] : copy.online_by_access_) {
      est.min_access_ms = std::min(est.min_access_ms, t);
      est.max_access_ms = std::max(est.max_access_ms, t);
    }
    est.amortized_ms = (est.phase_ms[static_cast<std::size_t>(Phase::kOnline)] +
                        est.phase_ms[static_cast<std::size_t>(Phase::kRebuild)]) /
                       static_cast<double>(est.accesses);
  }
  return est;
}

TimeEstimate estimate_time(const std::vector<TraceEvent>& trace, const PricingModel& pricing, std::size_t item_size,
                           std::size_t parallel_width) {
  TimeAccumulator acc(pricing, item_size, parallel_width);
  for (const auto& ev : trace) acc.add(ev);
  return acc.result();
}

}  // namespace ostore
