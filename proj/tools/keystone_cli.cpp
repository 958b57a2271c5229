// keystone command-line front end. Talks to the library only through the C
// interface in keystone/keystone.h.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "keystone/keystone.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct BatchDeleter {
  void operator()(ks_batch* b) const { ks_batch_destroy(b); }
};
struct ResultDeleter {
  void operator()(ks_result* r) const { ks_result_destroy(r); }
};
struct ScenarioDeleter {
  void operator()(ks_scenario* s) const { ks_scenario_destroy(s); }
};
struct ServiceDeleter {
  void operator()(ks_service* s) const { ks_service_destroy(s); }
};
struct StringDeleter {
  void operator()(char* s) const { ks_string_free(s); }
};
using BatchPtr = std::unique_ptr<ks_batch, BatchDeleter>;
using ResultPtr = std::unique_ptr<ks_result, ResultDeleter>;
using ScenarioPtr = std::unique_ptr<ks_scenario, ScenarioDeleter>;
using ServicePtr = std::unique_ptr<ks_service, ServiceDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

/// Thrown for bad flag values that CLI11 cannot see (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Thrown when the library rejects input data (exit 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ks_status status, const std::string& what) {
  if (status == KS_OK) return;
  const std::string message = what + ": " + ks_status_name(status) + ": " + ks_last_error();
  if (status == KS_ERR_INVALID_CONFIG || status == KS_ERR_INVALID_ARGUMENT) throw UsageError(message);
  throw DataError(message);
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "stdout" || output == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(output);
  if (!out) throw DataError("cannot write '" + output + "'");
  out << text;
}

struct SelectorFlags {
  std::size_t clusters = 2;
  double tau = 0.3;
  double eps = 1e-8;
  std::string metric = "euclidean";
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--clusters", clusters, "Number of k-means clusters C")->check(CLI::Range(2, 1 << 20));
    app->add_option("--tau", tau, "Unimodality threshold");
    app->add_option("--eps", eps, "Guard denominator offset");
    app->add_option("--metric", metric, "euclidean or cosine");
    app->add_option("--seed", seed, "k-means initialization seed");
  }

  ks_config config() const {
    ks_config c = ks_config_default();
    c.num_clusters = clusters;
    c.tau = tau;
    c.eps = eps;
    c.seed = seed;
    check(ks_metric_from_name(metric.c_str(), &c.metric), "--metric");
    if (!(tau > 0)) throw UsageError("--tau must be positive");
    if (!(eps > 0)) throw UsageError("--eps must be positive");
    return c;
  }
};

struct RunFlags {
  std::size_t episodes = 0;
  std::size_t repeats = 0;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--episodes", episodes, "Episodes per repeat (default: scenario)");
    app->add_option("--repeats", repeats, "Independent repeats (default: scenario)");
    app->add_option("--seed", seed, "Master seed (default: scenario)");
    app->add_option("--threads", threads, "Worker threads (0: all cores)");
  }

  ks_run_options options() const {
    ks_run_options o = ks_run_options_default();
    o.episodes = episodes;
    o.repeats = repeats;
    o.threads = threads;
    if (seed) {
      o.seed = *seed;
      o.use_scenario_seed = 0;
    }
    return o;
  }
};

ScenarioPtr load_scenario(const std::string& path) {
  ks_scenario* raw = nullptr;
  check(ks_scenario_load(path.c_str(), &raw), "scenario '" + path + "'");
  return ScenarioPtr(raw);
}

int run_select(const std::string& input, const std::string& format, std::optional<std::size_t> k_override,
               const SelectorFlags& flags, const std::string& output) {
  ks_batch_format fmt = KS_FORMAT_GUESS;
  if (!format.empty()) check(ks_format_from_name(format.c_str(), &fmt), "--format");
  const ks_config config = flags.config();

  ks_batch* raw_batch = nullptr;
  check(ks_batch_load(input.c_str(), fmt, &raw_batch), "input '" + input + "'");
  BatchPtr batch(raw_batch);
  if (k_override) check(ks_batch_truncate(batch.get(), *k_override), "--k-override");

  ks_result* raw_result = nullptr;
  check(ks_select(batch.get(), &config, &raw_result), "select");
  ResultPtr result(raw_result);

  char* json = nullptr;
  check(ks_result_to_json(result.get(), batch.get(), input.c_str(), &json), "format result");
  StringPtr text(json);
  emit(std::string(text.get()) + "\n", output);
  return kExitOk;
}

int run_simulate(const std::string& scenario_path, const std::string& policy, const RunFlags& run,
                 const std::string& output) {
  const ScenarioPtr scenario = load_scenario(scenario_path);
  const ks_run_options options = run.options();
  char* table = nullptr;
  check(ks_simulate(scenario.get(), policy.empty() ? nullptr : policy.c_str(), &options, &table), "simulate");
  StringPtr text(table);
  emit(text.get(), output);
  return kExitOk;
}

int run_sweep(const std::string& scenario_path, const std::string& base, const std::vector<std::string>& metrics,
              const std::vector<std::size_t>& ks, const std::vector<std::size_t>& cs, const RunFlags& run,
              const std::string& output) {
  const ScenarioPtr scenario = load_scenario(scenario_path);
  std::vector<ks_metric> metric_values;
  for (const auto& m : metrics) {
    ks_metric value{};
    check(ks_metric_from_name(m.c_str(), &value), "--metrics");
    metric_values.push_back(value);
  }
  std::string base_name = base;
  if (base_name.empty()) {
    // First keystone-style policy, i.e. the first one that is not single-sample.
    for (std::size_t i = 0; i < ks_scenario_policy_count(scenario.get()); ++i) {
      const std::string name = ks_scenario_policy_name(scenario.get(), i);
      if (name != "single_sample" && name != "single") {
        base_name = name;
        break;
      }
    }
    if (base_name.empty()) throw UsageError("scenario has no keystone policy; pass --base");
  }
  const ks_run_options options = run.options();
  char* table = nullptr;
  check(ks_sweep(scenario.get(), base_name.c_str(), metric_values.data(), metric_values.size(), ks.data(), ks.size(),
                 cs.data(), cs.size(), &options, &table),
        "sweep");
  StringPtr text(table);
  emit(text.get(), output);
  return kExitOk;
}

int run_serve(const std::string& transport, std::uint16_t port, const std::string& host, const SelectorFlags& flags) {
  const ks_config config = flags.config();
  ks_service* raw = nullptr;
  check(ks_service_create(&config, &raw), "service");
  ServicePtr service(raw);
  if (transport == "stdio") {
    std::ios::sync_with_stdio(false);
    check(ks_service_serve_stdio(service.get(), nullptr), "serve");
    return kExitOk;
  }
  ks_tcp_server* server = nullptr;
  check(ks_tcp_server_start(service.get(), host.c_str(), port, &server), "listen");
  std::cerr << "listening on " << host << ":" << ks_tcp_server_port(server) << std::endl;
  ks_tcp_server_wait(server);
  ks_tcp_server_destroy(server);
  return kExitOk;
}

double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

int run_bench(const std::vector<std::size_t>& k_list, const std::vector<std::size_t>& dim_list,
              std::size_t iterations, std::size_t warmup, std::uint64_t seed, const std::string& output) {
  if (iterations == 0) throw UsageError("--iterations must be positive");
  std::string report = "K,D,iterations,mean_us,p50_us,p99_us,max_us\n";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const ks_config config = ks_config_default();
  for (std::size_t k : k_list) {
    for (std::size_t dim : dim_list) {
      if (k == 0 || dim == 0) throw UsageError("bench sizes must be positive");
      // Two well-separated groups (about 70/30) so every call takes the clustering path.
      std::vector<double> values(k * dim);
      for (std::size_t i = 0; i < k; ++i) {
        const double offset = (i * 10 < k * 7) ? 0.0 : 25.0;
        for (std::size_t d = 0; d < dim; ++d) values[i * dim + d] = offset + noise(rng);
      }
      ks_batch* raw = nullptr;
      check(ks_batch_create(values.data(), k, 1, dim, &raw), "bench batch");
      BatchPtr batch(raw);

      std::vector<double> micros;
      micros.reserve(iterations);
      for (std::size_t it = 0; it < warmup + iterations; ++it) {
        ks_result* result = nullptr;
        const auto start = std::chrono::steady_clock::now();
        const ks_status status = ks_select(batch.get(), &config, &result);
        const auto stop = std::chrono::steady_clock::now();
        ks_result_destroy(result);
        check(status, "bench select");
        if (it >= warmup) micros.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
      }
      double mean = 0.0;
      for (double m : micros) mean += m;
      mean /= static_cast<double>(micros.size());
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.2f,%.2f,%.2f,%.2f\n", k, dim, iterations, mean,
                    percentile(micros, 0.50), percentile(micros, 0.99), *std::max_element(micros.begin(), micros.end()));
      report += line;
    }
  }
  emit(report, output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keystone: consensus selection over sampled action chunks"};
  app.require_subcommand(1);

  auto* select_cmd = app.add_subcommand("select", "Select one candidate from a batch file");
  std::string input, format, output;
  std::optional<std::size_t> k_override;
  SelectorFlags selector_flags;
  select_cmd->add_option("--input", input, "Batch file")->required();
  select_cmd->add_option("--format", format, "json or csv (default: by extension)");
  select_cmd->add_option("--k-override", k_override, "Use only the first K candidates");
  select_cmd->add_option("--output", output, "Output path or stdout");
  selector_flags.attach(select_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Estimate episode success rates for scenario policies");
  std::string scenario_path, policy;
  RunFlags run_flags;
  simulate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate_cmd->add_option("--policy", policy, "Policy name (default: all)");
  simulate_cmd->add_option("--output", output, "Output path or stdout");
  run_flags.attach(simulate_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "One-at-a-time ablation around a keystone policy");
  std::string base;
  std::vector<std::string> metrics;
  std::vector<std::size_t> k_values, c_values;
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--base", base, "Base keystone policy name");
  sweep_cmd->add_option("--metrics", metrics, "Metrics to try")->delimiter(',');
  sweep_cmd->add_option("--k-values", k_values, "Sample counts to try")->delimiter(',');
  sweep_cmd->add_option("--c-values", c_values, "Cluster counts to try")->delimiter(',');
  sweep_cmd->add_option("--output", output, "Output path or stdout");
  run_flags.attach(sweep_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Line-delimited selection service");
  std::string transport = "stdio", host = "127.0.0.1";
  std::uint16_t port = 7878;
  serve_cmd->add_option("--transport", transport, "stdio or tcp")->check(CLI::IsMember({"stdio", "tcp"}));
  serve_cmd->add_option("--port", port, "TCP port (0: ephemeral)");
  serve_cmd->add_option("--host", host, "TCP listen address");
  selector_flags.attach(serve_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "Selection latency percentiles");
  std::vector<std::size_t> k_list{16}, dim_list{2048};
  std::size_t iterations = 1000, warmup = 50;
  std::uint64_t bench_seed = 1;
  bench_cmd->add_option("--k-list", k_list, "Candidate counts")->delimiter(',');
  bench_cmd->add_option("--dim-list", dim_list, "Flattened chunk dimensions")->delimiter(',');
  bench_cmd->add_option("--iterations", iterations, "Timed selections per size");
  bench_cmd->add_option("--warmup", warmup, "Untimed selections per size");
  bench_cmd->add_option("--seed", bench_seed, "Batch generator seed");
  bench_cmd->add_option("--output", output, "Output path or stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*select_cmd) return run_select(input, format, k_override, selector_flags, output);
    if (*simulate_cmd) return run_simulate(scenario_path, policy, run_flags, output);
    if (*sweep_cmd) return run_sweep(scenario_path, base, metrics, k_values, c_values, run_flags, output);
    if (*serve_cmd) return run_serve(transport, port, host, selector_flags);
    if (*bench_cmd) return run_bench(k_list, dim_list, iterations, warmup, bench_seed, output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
