#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "ostore/server_store.hpp"

namespace ostore {

// P[i][j]: posterior that the tracked item is in group j after pass i.
using WeightMatrix = std::vector<std::vector<double>>;

// X[k][j]: items read in input group k that the next pass reads in group j.
struct PassFlow {
  std::vector<std::vector<std::uint64_t>> X;

  std::uint64_t input_size(std::size_t k) const;
  std::uint64_t output_size(std::size_t j) const;
  std::size_t outputs() const { return X.empty() ? 0 : X[0].size(); }
};

WeightMatrix tracker_weights(const std::vector<PassFlow>& flows, std::size_t start_group = 0,
                             std::size_t initial_groups = 1);

// Largest per-key weight after the last pass: max_j P[b][j] / |group j|.
double max_key_weight(const WeightMatrix& P, const std::vector<PassFlow>& flows);
std::vector<double> max_key_weight_per_pass(const WeightMatrix& P, const std::vector<PassFlow>& flows);

// Rebuilds the adversary's view of one shuffle of `level` from a trace that
// starts with an empty server. When the last pass's output is never read,
// it is grouped in key order by `group_size`.
std::vector<PassFlow> extract_flows(const std::vector<TraceEvent>& trace, std::uint8_t level,
                                    std::size_t group_size);

struct MixingTrial {
  std::size_t trial = 0;
  std::vector<double> max_weight;  // per pass, 1..b
};

struct MixingSummary {
  std::size_t n = 0;
  std::size_t M = 0;
  std::size_t b = 0;
  std::vector<MixingTrial> trials;

  std::vector<double> final_weights() const;
  double fraction_at_most(double bound) const;
  double mean() const;
  double quantile(double q) const;
};

MixingSummary mixing_experiment(std::size_t n, std::size_t M, std::size_t b, std::size_t trials,
                                std::uint64_t seed);

struct ShapeEntry {
  OpKind op = OpKind::kGet;
  std::uint64_t items = 0;
  bool opens_message = false;

  bool operator==(const ShapeEntry&) const = default;
};

std::vector<ShapeEntry> trace_shape(const std::vector<TraceEvent>& trace);
bool traces_identical(const std::vector<TraceEvent>& a, const std::vector<TraceEvent>& b);

struct UniformityResult {
  double p_value = 0;
  double statistic = 0;
  std::size_t samples = 0;
  std::size_t duplicates = 0;
};

// Streaming form of key_uniformity_test, fed one event at a time.
class KeyUniformityMonitor {
 public:
  KeyUniformityMonitor();
  ~KeyUniformityMonitor();
  KeyUniformityMonitor(KeyUniformityMonitor&&) noexcept;
  KeyUniformityMonitor& operator=(KeyUniformityMonitor&&) noexcept;

  void add(const TraceEvent& ev);
  std::size_t samples() const;
  UniformityResult result(std::size_t min_samples = 1000) const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Rank of every online single-key get among the live keys of its namespace,
// tested against the uniform distribution. Repeated keys within an epoch of
// the same level are counted as duplicates.
UniformityResult key_uniformity_test(const std::vector<TraceEvent>& trace, std::size_t min_samples = 1000);

// One-sample KS test against U(0,1).
UniformityResult ks_uniform(std::vector<double> samples);
double kolmogorov_q(double lambda);

double chi_square_uniform_p(const std::vector<std::uint64_t>& counts);
std::uint64_t permutation_rank(const std::vector<std::size_t>& perm);

}  // namespace ostore
