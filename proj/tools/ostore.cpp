#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ostore/acceptance.hpp"
#include "ostore/analysis.hpp"
#include "ostore/cost_model.hpp"
#include "ostore/errors.hpp"
#include "ostore/recursive.hpp"
#include "ostore/trace_io.hpp"
#include "ostore/workload.hpp"

using nlohmann::json;
using namespace ostore;

namespace {

struct CommonFlags {
  std::size_t n = 10000;
  int c = 2;
  std::size_t passes = 4;
  std::size_t item_size = 1024;
  std::uint64_t seed = 1;
  std::size_t message_size = 0;
  std::string frontend = "direct";
  std::string config_file;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--n", f.n, "number of items N");
  cmd->add_option("--c", f.c, "recursion depth c");
  cmd->add_option("--passes", f.passes, "buffer shuffle passes b");
  cmd->add_option("--item-size", f.item_size, "server item size in bytes");
  cmd->add_option("--seed", f.seed, "session seed");
  cmd->add_option("--message-size", f.message_size, "override M (default floor(N^(1/c)))");
  cmd->add_option("--frontend", f.frontend, "direct or cuckoo")->check(CLI::IsMember({"direct", "cuckoo"}));
  cmd->add_option("--config", f.config_file, "construction config JSON");
  cmd->add_option("--out", f.out, "output file");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
}

OsConfig config_of(const CommonFlags& f, CLI::App* cmd) {
  OsConfig cfg;
  if (!f.config_file.empty()) cfg = config_from_json(read_json(f.config_file));
  if (!cmd->count("--config") || cmd->count("--n")) cfg.N = f.n;
  if (!cmd->count("--config") || cmd->count("--c")) cfg.c = f.c;
  if (!cmd->count("--config") || cmd->count("--passes")) cfg.passes = f.passes;
  if (!cmd->count("--config") || cmd->count("--item-size")) cfg.item_size = f.item_size;
  if (!cmd->count("--config") || cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--message-size")) cfg.message_size = f.message_size;
  if (!cmd->count("--config") || cmd->count("--frontend")) {
    cfg.frontend = f.frontend == "cuckoo" ? Frontend::kCuckoo : Frontend::kDirect;
  }
  return cfg;
}

PricingModel load_pricing(const std::string& path) {
  return path.empty() ? PricingModel::s3_2011() : PricingModel::from_json(read_json(path));
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open " + path);
  return read_trace_jsonl(in);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot write " + out);
  f << text;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblivious storage simulator and cost estimator"};
  app.require_subcommand(1);

  CommonFlags build_f;
  auto* build = app.add_subcommand("build", "build an instance and report its layout");
  add_common(build, build_f);

  CommonFlags run_f;
  std::size_t accesses = 0;
  std::string workload_file, pricing_file, trace_file;
  std::size_t parallel_width = 0, pricing_item_size = 1024;
  double put_fraction = 0.5;
  bool json_out = false;
  auto* run = app.add_subcommand("run", "replay a workload and report I/O statistics");
  add_common(run, run_f);
  run->add_option("--accesses", accesses, "number of accesses (default N)");
  run->add_option("--workload-file", workload_file, "workload JSON");
  run->add_option("--pricing-file", pricing_file, "pricing and RTT table JSON");
  run->add_option("--pricing-item-size", pricing_item_size, "item size used for RTT lookup");
  run->add_option("--parallel-width", parallel_width, "concurrent requests per kind (default M)");
  run->add_option("--put-fraction", put_fraction, "fraction of accesses that are puts");
  run->add_option("--trace", trace_file, "write the server trace as JSON lines");
  run->add_flag("--json", json_out, "print the report as JSON");

  std::string cost_trace, cost_pricing, cost_out;
  auto* est_cost = app.add_subcommand("estimate-cost", "price a trace");
  est_cost->add_option("--trace", cost_trace, "trace JSON lines")->required();
  est_cost->add_option("--pricing-file", cost_pricing, "pricing JSON");
  est_cost->add_option("--out", cost_out, "output file");

  std::string time_trace, time_pricing, time_out;
  std::size_t time_item_size = 1024, time_width = 0;
  auto* est_time = app.add_subcommand("estimate-time", "estimate latency of a trace");
  est_time->add_option("--trace", time_trace, "trace JSON lines")->required();
  est_time->add_option("--pricing-file", time_pricing, "pricing JSON");
  est_time->add_option("--item-size", time_item_size, "item size for RTT lookup");
  est_time->add_option("--parallel-width", time_width, "concurrent requests per kind")->required();
  est_time->add_option("--out", time_out, "output file");

  std::size_t sweep_n = 4096, sweep_trials = 20;
  std::uint64_t sweep_seed = 1;
  std::string sweep_m = "16", sweep_b = "1,2,3,4,5,6", sweep_out;
  auto* sweep = app.add_subcommand("mixing-sweep", "tracker weight experiments for the buffer shuffle");
  sweep->add_option("--n", sweep_n, "items");
  sweep->add_option("--m", sweep_m, "comma-separated group sizes");
  sweep->add_option("--passes", sweep_b, "comma-separated pass counts");
  sweep->add_option("--trials", sweep_trials, "trials per configuration");
  sweep->add_option("--seed", sweep_seed, "session seed");
  sweep->add_option("--out", sweep_out, "CSV output file");

  bool verify_quick = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_flag("--quick", verify_quick, "skip the N=10^6 criteria");
  std::vector<std::string> verify_only;
  verify->add_option("--only", verify_only, "criterion numbers to run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      OsConfig cfg = config_of(build_f, build);
      OsClient client(cfg);
      client.build(initial_items(cfg.N));
      json j;
      j["config"] = config_to_json(cfg);
      j["message_size"] = client.message_size();
      j["server_items"] = client.store().size();
      j["build_stats"] = stats_to_json(client.store().stats());
      j["peak_client_items"] = client.peak_client_items();
      json lv = json::array();
      for (const auto& l : client.levels()) {
        lv.push_back({{"level", l.level}, {"n", l.n}, {"epoch", l.epoch},
                      {"cache", l.cuckoo_cache ? "cuckoo" : "client"}, {"cache_cells", l.cache_cells}});
      }
      j["levels"] = lv;
      emit(build_f.out, j.dump(2) + "\n");
    } else if (*run) {
      WorkloadSpec spec;
      if (!workload_file.empty()) spec = workload_from_json(read_json(workload_file));
      OsConfig base = config_of(run_f, run);
      if (workload_file.empty() || run->count("--n") || run->count("--c") || run->count("--config")) spec.os = base;
      if (run->count("--accesses")) spec.accesses = accesses;
      if (run->count("--put-fraction")) spec.put_fraction = put_fraction;
      PricingModel pricing = load_pricing(pricing_file);
      RunOptions opt;
      opt.pricing = &pricing;
      opt.pricing_item_size = pricing_item_size;
      opt.parallel_width = parallel_width;
      std::ofstream trace;
      if (!trace_file.empty()) {
        trace.open(trace_file);
        if (!trace) throw Error(ErrorCode::kInvalidConfig, "cannot write " + trace_file);
        opt.trace_out = &trace;
      }
      RunReport report = run_workload(spec, opt);
      if (!run_f.out.empty()) emit(run_f.out, report.to_json().dump(2) + "\n");
      std::cout << (json_out ? report.to_json().dump(2) + "\n" : report.to_text());
    } else if (*est_cost) {
      auto est = estimate_cost(load_trace(cost_trace), load_pricing(cost_pricing));
      json j;
      for (std::size_t i = 0; i < kRequestKinds; ++i) {
        j["requests"][std::string(request_name(static_cast<RequestKind>(i)))] = est.requests[i];
      }
      j["total"] = est.total;
      emit(cost_out, j.dump(2) + "\n");
    } else if (*est_time) {
      auto est = estimate_time(load_trace(time_trace), load_pricing(time_pricing), time_item_size, time_width);
      json j{{"total_ms", est.total_ms},
             {"accesses", est.accesses},
             {"min_access_ms", est.min_access_ms},
             {"max_access_ms", est.max_access_ms},
             {"amortized_ms", est.amortized_ms}};
      emit(time_out, j.dump(2) + "\n");
    } else if (*sweep) {
      std::ostringstream csv;
      csv << "n,M,b,trial,pass,max_weight\n";
      for (std::size_t m : parse_list(sweep_m)) {
        for (std::size_t b : parse_list(sweep_b)) {
          auto summary = mixing_experiment(sweep_n, m, b, sweep_trials, sweep_seed);
          for (const auto& t : summary.trials) {
            for (std::size_t p = 0; p < t.max_weight.size(); ++p) {
              csv << sweep_n << ',' << m << ',' << b << ',' << t.trial << ',' << p + 1 << ',' << t.max_weight[p]
                  << '\n';
            }
          }
          std::cerr << "M=" << m << " b=" << b << " mean n*w=" << summary.mean() * sweep_n
                    << " frac<=1.1/n=" << summary.fraction_at_most(1.1 / sweep_n) << "\n";
        }
      }
      emit(sweep_out, csv.str());
    } else if (*verify) {
      AcceptanceOptions opt;
      opt.quick = verify_quick;
      opt.only = verify_only;
      auto results = run_acceptance(opt, std::cout);
      for (const auto& r : results) {
        if (!r.pass && !r.informational) return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
