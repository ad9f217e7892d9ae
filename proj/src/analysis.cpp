#include "ostore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ext/pb_ds/assoc_container.hpp>
#include <ext/pb_ds/tree_policy.hpp>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "ostore/client_context.hpp"
#include "ostore/errors.hpp"
#include "ostore/shuffle.hpp"

namespace ostore {

namespace {

using OrderedKeys =
    __gnu_pbds::tree<StoredKey, __gnu_pbds::null_type, std::less<StoredKey>, __gnu_pbds::rb_tree_tag,
                     __gnu_pbds::tree_order_statistics_node_update>;

// Key set reconstructed from the trace.
class ServerView {
 public:
  // Returns the keys a get_range returned.
  std::vector<StoredKey> apply(const TraceEvent& ev) {
    std::vector<StoredKey> out;
    switch (ev.op) {
      case OpKind::kPut:
        keys_.insert(ev.key);
        break;
      case OpKind::kRemove:
        keys_.erase(ev.key);
        break;
      case OpKind::kGet:
        break;
      case OpKind::kGetRange: {
        for (auto it = keys_.lower_bound(ev.key); it != keys_.end() && out.size() < ev.items; ++it) {
          if (ev.key_hi && *ev.key_hi < *it) break;
          out.push_back(*it);
        }
        break;
      }
      case OpKind::kRemoveRange: {
        auto it = keys_.lower_bound(ev.key);
        while (it != keys_.end() && !(ev.key_hi && *ev.key_hi < *it)) it = keys_.erase(it);
        break;
      }
    }
    return out;
  }

  // (rank, size) of key among live keys sharing its first byte.
  std::pair<std::size_t, std::size_t> rank(const StoredKey& key) const {
    StoredKey lo = prefix_min(key[0]);
    std::size_t base = keys_.order_of_key(lo);
    std::size_t end = key[0] == 0xff ? keys_.size() : keys_.order_of_key(prefix_min(static_cast<std::uint8_t>(key[0] + 1)));
    return {keys_.order_of_key(key) - base, end - base};
  }

 private:
  OrderedKeys keys_;
};

std::uint8_t level_of(const StoredKey& k) { return k[0] >> 4; }
std::uint8_t phase_of(const StoredKey& k) { return k[0] & 0x0f; }

}  // namespace

std::uint64_t PassFlow::input_size(std::size_t k) const {
  std::uint64_t s = 0;
  for (auto x : X[k]) s += x;
  return s;
}

std::uint64_t PassFlow::output_size(std::size_t j) const {
  std::uint64_t s = 0;
  for (const auto& row : X) s += row[j];
  return s;
}

WeightMatrix tracker_weights(const std::vector<PassFlow>& flows, std::size_t start_group, std::size_t initial_groups) {
  std::size_t g0 = flows.empty() ? initial_groups : flows[0].X.size();
  if (start_group >= g0) throw Error(ErrorCode::kInvalidConfig, "start group out of range");
  WeightMatrix P;
  P.emplace_back(g0, 0.0);
  P[0][start_group] = 1.0;
  for (const auto& f : flows) {
    const auto& prev = P.back();
    if (f.X.size() != prev.size()) throw Error(ErrorCode::kInvalidConfig, "flow does not chain");
    std::vector<double> next(f.outputs(), 0.0);
    for (std::size_t k = 0; k < f.X.size(); ++k) {
      if (prev[k] == 0.0) continue;
      auto size = static_cast<double>(f.input_size(k));
      if (size == 0) continue;
      for (std::size_t j = 0; j < next.size(); ++j) next[j] += prev[k] * static_cast<double>(f.X[k][j]) / size;
    }
    P.push_back(std::move(next));
  }
  for (std::size_t i = 0; i < P.size(); ++i) {
    double sum = 0;
    for (double p : P[i]) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::kNormalizationBroken, "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
  return P;
}

std::vector<double> max_key_weight_per_pass(const WeightMatrix& P, const std::vector<PassFlow>& flows) {
  std::vector<double> out;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    double best = 0;
    for (std::size_t j = 0; j < P[i + 1].size(); ++j) {
      auto size = static_cast<double>(flows[i].output_size(j));
      if (size > 0) best = std::max(best, P[i + 1][j] / size);
    }
    out.push_back(best);
  }
  return out;
}

double max_key_weight(const WeightMatrix& P, const std::vector<PassFlow>& flows) {
  auto all = max_key_weight_per_pass(P, flows);
  return all.empty() ? 0.0 : all.back();
}

std::vector<PassFlow> extract_flows(const std::vector<TraceEvent>& trace, std::uint8_t level, std::size_t group_size) {
  ServerView view;
  // Read group of each key, keyed by its phase.
  std::map<StoredKey, std::size_t> read_group;
  std::map<std::uint8_t, std::size_t> groups_in_phase;
  // Input group (of pass phase+1) that wrote each output key.
  std::map<StoredKey, std::size_t> written_by;
  std::optional<std::pair<std::uint8_t, std::size_t>> last_read;
  std::optional<std::uint64_t> last_read_msg;
  std::uint8_t max_phase = 0;

  for (const auto& ev : trace) {
    auto keys = view.apply(ev);
    if (level_of(ev.key) != level) continue;
    std::uint8_t phase = phase_of(ev.key);
    if (ev.op == OpKind::kGetRange) {
      std::size_t g = groups_in_phase[phase]++;
      for (const auto& k : keys) read_group[k] = g;
      last_read = {phase, g};
      last_read_msg = ev.msg;
    } else if (ev.op == OpKind::kPut && last_read && phase == last_read->first + 1 && last_read_msg &&
               ev.msg == *last_read_msg + 1) {
      written_by[ev.key] = last_read->second;
      max_phase = std::max(max_phase, phase);
    }
  }

  std::vector<PassFlow> flows;
  for (std::uint8_t p = 1; p <= max_phase; ++p) {
    PassFlow f;
    std::size_t inputs = groups_in_phase[static_cast<std::uint8_t>(p - 1)];
    std::vector<std::pair<StoredKey, std::size_t>> outs;
    for (const auto& [k, g] : written_by) {
      if (phase_of(k) == p) outs.emplace_back(k, g);
    }
    std::sort(outs.begin(), outs.end());
    std::size_t outputs = groups_in_phase.count(p) ? groups_in_phase[p] : 0;
    bool chunk = outputs == 0;
    if (chunk) outputs = (outs.size() + group_size - 1) / group_size;
    f.X.assign(inputs, std::vector<std::uint64_t>(outputs, 0));
    for (std::size_t i = 0; i < outs.size(); ++i) {
      std::size_t j;
      if (chunk) {
        j = i / group_size;
      } else {
        auto it = read_group.find(outs[i].first);
        if (it == read_group.end()) throw Error(ErrorCode::kMalformed, "output key never read");
        j = it->second;
      }
      f.X[outs[i].second][j] += 1;
    }
    flows.push_back(std::move(f));
  }
  return flows;
}

std::vector<double> MixingSummary::final_weights() const {
  std::vector<double> out;
  for (const auto& t : trials) out.push_back(t.max_weight.empty() ? 0.0 : t.max_weight.back());
  return out;
}

double MixingSummary::fraction_at_most(double bound) const {
  auto w = final_weights();
  if (w.empty()) return 0;
  return static_cast<double>(std::count_if(w.begin(), w.end(), [&](double x) { return x <= bound; })) /
         static_cast<double>(w.size());
}

double MixingSummary::mean() const {
  auto w = final_weights();
  if (w.empty()) return 0;
  double s = 0;
  for (double x : w) s += x;
  return s / static_cast<double>(w.size());
}

double MixingSummary::quantile(double q) const {
  auto w = final_weights();
  if (w.empty()) return 0;
  std::sort(w.begin(), w.end());
  auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(w.size() - 1) + 0.5));
  return w[std::min(idx, w.size() - 1)];
}

MixingSummary mixing_experiment(std::size_t n, std::size_t M, std::size_t b, std::size_t trials, std::uint64_t seed) {
  if (n < 2 || M < 2) throw Error(ErrorCode::kInvalidConfig, "mixing needs n, M >= 2");
  MixingSummary summary{n, M, b, {}};
  constexpr std::uint8_t kLevel = 1;
  for (std::size_t t = 0; t < trials; ++t) {
    ServerStore store({64, M, true});
    SessionRng rng(seed ^ t);
    KeyMaterial keys = KeyMaterial::generate(rng);
    ClientContext ctx(store, keys, std::move(rng));
    {
      Stager stage(ctx, key_prefix(kLevel, 0));
      for (std::size_t i = 0; i < n; ++i) stage.add(Item{LogicalKey::dummy(i + 1), std::nullopt});
      stage.flush();
    }
    ShuffleConfig cfg;
    cfg.passes = b;
    cfg.group_size = M;
    buffer_shuffle(ctx, kLevel, n, cfg);
    auto flows = extract_flows(store.trace(), kLevel, M);
    auto P = tracker_weights(flows, 0);
    summary.trials.push_back({t, max_key_weight_per_pass(P, flows)});
  }
  return summary;
}

std::vector<ShapeEntry> trace_shape(const std::vector<TraceEvent>& trace) {
  std::vector<ShapeEntry> out;
  out.reserve(trace.size());
  std::optional<std::uint64_t> msg;
  for (const auto& ev : trace) {
    out.push_back({ev.op, ev.items, !msg || *msg != ev.msg});
    msg = ev.msg;
  }
  return out;
}

bool traces_identical(const std::vector<TraceEvent>& a, const std::vector<TraceEvent>& b) {
  return trace_shape(a) == trace_shape(b);
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

UniformityResult ks_uniform(std::vector<double> samples) {
  UniformityResult r;
  r.samples = samples.size();
  if (samples.empty()) return r;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double x = std::clamp(samples[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1) / n - x, x - static_cast<double>(i) / n});
  }
  r.statistic = d;
  double sn = std::sqrt(n);
  r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

struct KeyUniformityMonitor::State {
  ServerView view;
  std::map<std::uint8_t, std::set<StoredKey>> epoch_keys;
  std::vector<double> positions;
  std::size_t duplicates = 0;
};

KeyUniformityMonitor::KeyUniformityMonitor() : state_(std::make_unique<State>()) {}
KeyUniformityMonitor::~KeyUniformityMonitor() = default;
KeyUniformityMonitor::KeyUniformityMonitor(KeyUniformityMonitor&&) noexcept = default;
KeyUniformityMonitor& KeyUniformityMonitor::operator=(KeyUniformityMonitor&&) noexcept = default;

void KeyUniformityMonitor::add(const TraceEvent& ev) {
  State& s = *state_;
  if (ev.phase == Phase::kRebuild || ev.phase == Phase::kBuild) s.epoch_keys.erase(level_of(ev.key));
  if (ev.op == OpKind::kGet && ev.phase == Phase::kOnline) {
    auto [rank, size] = s.view.rank(ev.key);
    if (size > 0) s.positions.push_back((static_cast<double>(rank) + 0.5) / static_cast<double>(size));
    if (!s.epoch_keys[level_of(ev.key)].insert(ev.key).second) ++s.duplicates;
  }
  s.view.apply(ev);
}

std::size_t KeyUniformityMonitor::samples() const { return state_->positions.size(); }

UniformityResult KeyUniformityMonitor::result(std::size_t min_samples) const {
  if (state_->positions.size() < min_samples) {
    throw Error(ErrorCode::kInsufficientSamples,
                std::to_string(state_->positions.size()) + " requests, need " + std::to_string(min_samples));
  }
  UniformityResult r = ks_uniform(state_->positions);
  r.duplicates = state_->duplicates;
  return r;
}

UniformityResult key_uniformity_test(const std::vector<TraceEvent>& trace, std::size_t min_samples) {
  KeyUniformityMonitor monitor;
  for (const auto& ev : trace) monitor.add(ev);
  return monitor.result(min_samples);
}

double chi_square_uniform_p(const std::vector<std::uint64_t>& counts) {
  if (counts.size() < 2) return 1.0;
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0;
  for (auto c : counts) {
    double d = static_cast<double>(c) - expected;
    chi += d * d / expected;
  }
  const double df = static_cast<double>(counts.size() - 1);
  return boost::math::gamma_q(df / 2.0, chi / 2.0);
}

std::uint64_t permutation_rank(const std::vector<std::size_t>& perm) {
  std::uint64_t rank = 0;
  const std::size_t n = perm.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller += perm[j] < perm[i] ? 1 : 0;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

}  // namespace ostore
