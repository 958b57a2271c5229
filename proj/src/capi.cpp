#include "keystone/keystone.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "keystone/batch_io.hpp"
#include "keystone/protocol.hpp"
#include "keystone/scenario.hpp"
#include "keystone/selector.hpp"
#include "keystone/tcp_server.hpp"

struct ks_batch {
  keystone::CandidateBatch batch;
};
struct ks_result {
  keystone::SelectionResult result;
};
struct ks_service {
  keystone::Service service;
};
struct ks_tcp_server {
  keystone::TcpServer server;
};
struct ks_scenario {
  keystone::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

ks_status status_for(keystone::ErrorCode code) {
  using keystone::ErrorCode;
  switch (code) {
    case ErrorCode::kShapeMismatch: return KS_ERR_SHAPE_MISMATCH;
    case ErrorCode::kNonFiniteValue: return KS_ERR_NON_FINITE_VALUE;
    case ErrorCode::kEmptyBatch: return KS_ERR_EMPTY_BATCH;
    case ErrorCode::kDegenerateInput: return KS_ERR_DEGENERATE_INPUT;
    case ErrorCode::kInsufficientCandidates: return KS_ERR_INSUFFICIENT_CANDIDATES;
    case ErrorCode::kInvalidConfig: return KS_ERR_INVALID_CONFIG;
    case ErrorCode::kParseError: return KS_ERR_PARSE;
    case ErrorCode::kRowCountMismatch: return KS_ERR_ROW_COUNT_MISMATCH;
    case ErrorCode::kIoError: return KS_ERR_IO;
    case ErrorCode::kInternal: return KS_ERR_INTERNAL;
  }
  return KS_ERR_INTERNAL;
}

ks_status fail(ks_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
ks_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return KS_OK;
  } catch (const keystone::Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(KS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KS_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

keystone::SelectorConfig to_cpp(const ks_config& c) {
  keystone::SelectorConfig config;
  config.num_clusters = c.num_clusters;
  config.tau = c.tau;
  config.eps = c.eps;
  if (c.metric != KS_METRIC_EUCLIDEAN && c.metric != KS_METRIC_COSINE) {
    throw keystone::Error(keystone::ErrorCode::kInvalidConfig, "unknown metric value");
  }
  config.metric = c.metric == KS_METRIC_COSINE ? keystone::Metric::kCosine : keystone::Metric::kEuclidean;
  config.seed = c.seed;
  config.max_iterations = c.max_iterations;
  config.validate();
  return config;
}

keystone::BatchFormat to_cpp(ks_batch_format format, const char* path) {
  switch (format) {
    case KS_FORMAT_STRUCTURED: return keystone::BatchFormat::kStructuredText;
    case KS_FORMAT_DELIMITED: return keystone::BatchFormat::kDelimited;
    case KS_FORMAT_GUESS: return keystone::guess_batch_format(path);
  }
  throw keystone::Error(keystone::ErrorCode::kInvalidConfig, "unknown batch format value");
}

struct RunParams {
  std::size_t episodes;
  std::size_t repeats;
  std::uint64_t seed;
  unsigned threads;
};

RunParams run_params(const keystone::Scenario& scenario, const ks_run_options* options) {
  const ks_run_options o = options ? *options : ks_run_options_default();
  return {o.episodes ? o.episodes : scenario.episodes, o.repeats ? o.repeats : scenario.repeats,
          o.use_scenario_seed ? scenario.seed : o.seed, o.threads};
}

}  // namespace

#define KS_REQUIRE(cond)                                                   \
  do {                                                                     \
    if (!(cond)) return fail(KS_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

extern "C" {

const char* ks_version(void) { return "0.1.0"; }

const char* ks_last_error(void) { return g_last_error.c_str(); }

const char* ks_status_name(ks_status status) {
  switch (status) {
    case KS_OK: return "ok";
    case KS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case KS_ERR_SHAPE_MISMATCH: return "shape_mismatch";
    case KS_ERR_NON_FINITE_VALUE: return "non_finite_value";
    case KS_ERR_EMPTY_BATCH: return "empty_batch";
    case KS_ERR_DEGENERATE_INPUT: return "degenerate_input";
    case KS_ERR_INSUFFICIENT_CANDIDATES: return "insufficient_candidates";
    case KS_ERR_INVALID_CONFIG: return "invalid_config";
    case KS_ERR_PARSE: return "parse_error";
    case KS_ERR_ROW_COUNT_MISMATCH: return "row_count_mismatch";
    case KS_ERR_IO: return "io_error";
    case KS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void ks_string_free(char* str) { std::free(str); }

ks_config ks_config_default(void) {
  const keystone::SelectorConfig d;
  return ks_config{d.num_clusters, d.tau, d.eps, KS_METRIC_EUCLIDEAN, d.seed, d.max_iterations};
}

ks_run_options ks_run_options_default(void) { return ks_run_options{0, 0, 0, 1, 0}; }

ks_status ks_metric_from_name(const char* name, ks_metric* out) {
  KS_REQUIRE(name && out);
  return guarded([&] {
    *out = keystone::parse_metric(name) == keystone::Metric::kCosine ? KS_METRIC_COSINE : KS_METRIC_EUCLIDEAN;
  });
}

ks_status ks_format_from_name(const char* name, ks_batch_format* out) {
  KS_REQUIRE(name && out);
  return guarded([&] {
    *out = keystone::parse_batch_format(name) == keystone::BatchFormat::kDelimited ? KS_FORMAT_DELIMITED
                                                                                   : KS_FORMAT_STRUCTURED;
  });
}

ks_status ks_batch_create(const double* values, size_t count, size_t steps, size_t dims, ks_batch** out) {
  KS_REQUIRE(out);
  KS_REQUIRE(values || count * steps * dims == 0);
  return guarded([&] {
    std::vector<double> data(values, values + count * steps * dims);
    *out = new ks_batch{keystone::validate_batch(count, steps, dims, std::move(data))};
  });
}

ks_status ks_batch_load(const char* path, ks_batch_format format, ks_batch** out) {
  KS_REQUIRE(path && out);
  return guarded([&] { *out = new ks_batch{keystone::parse_batch_file(path, to_cpp(format, path))}; });
}

ks_status ks_batch_save(const ks_batch* batch, const char* path, ks_batch_format format) {
  KS_REQUIRE(batch && path);
  return guarded([&] { keystone::write_batch_file(batch->batch, path, to_cpp(format, path)); });
}

ks_status ks_batch_truncate(ks_batch* batch, size_t count) {
  KS_REQUIRE(batch);
  if (count == 0 || count > batch->batch.size()) {
    return fail(KS_ERR_INVALID_ARGUMENT, "cannot keep " + std::to_string(count) + " of " +
                                             std::to_string(batch->batch.size()) + " candidates");
  }
  return guarded([&] {
    const auto& b = batch->batch;
    const auto v = b.values();
    std::vector<double> kept(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count * b.dimension()));
    batch->batch = keystone::CandidateBatch(count, b.steps(), b.dims(), std::move(kept));
  });
}

size_t ks_batch_size(const ks_batch* batch) { return batch ? batch->batch.size() : 0; }
size_t ks_batch_steps(const ks_batch* batch) { return batch ? batch->batch.steps() : 0; }
size_t ks_batch_dims(const ks_batch* batch) { return batch ? batch->batch.dims() : 0; }
const double* ks_batch_data(const ks_batch* batch) { return batch ? batch->batch.values().data() : nullptr; }
void ks_batch_destroy(ks_batch* batch) { delete batch; }

ks_status ks_select(const ks_batch* batch, const ks_config* config, ks_result** out) {
  KS_REQUIRE(batch && out);
  return guarded([&] {
    const keystone::SelectorConfig cfg = config ? to_cpp(*config) : keystone::SelectorConfig{};
    *out = new ks_result{keystone::select(batch->batch, cfg)};
  });
}

size_t ks_result_selected_index(const ks_result* result) { return result ? result->result.selected_index : 0; }
double ks_result_guard_score(const ks_result* result) { return result ? result->result.guard_score : 0.0; }
int ks_result_unimodal(const ks_result* result) { return result && result->result.unimodal ? 1 : 0; }
int ks_result_fell_back(const ks_result* result) { return result && result->result.fell_back ? 1 : 0; }
size_t ks_result_global_medoid(const ks_result* result) { return result ? result->result.global_medoid : 0; }

size_t ks_result_cluster_sizes(const ks_result* result, size_t* sizes, size_t capacity) {
  if (!result) return 0;
  const auto& s = result->result.cluster_sizes;
  if (sizes) {
    for (size_t i = 0; i < s.size() && i < capacity; ++i) sizes[i] = s[i];
  }
  return s.size();
}

ks_status ks_result_to_json(const ks_result* result, const ks_batch* batch, const char* id, char** out) {
  KS_REQUIRE(result && batch && id && out);
  if (result->result.selected_index >= batch->batch.size()) {
    return fail(KS_ERR_INVALID_ARGUMENT, "result does not belong to this batch");
  }
  return guarded([&] { *out = copy_string(keystone::response_json(id, batch->batch, result->result).dump()); });
}

void ks_result_destroy(ks_result* result) { delete result; }

ks_status ks_service_create(const ks_config* defaults, ks_service** out) {
  KS_REQUIRE(out);
  return guarded([&] {
    *out = new ks_service{keystone::Service(defaults ? to_cpp(*defaults) : keystone::SelectorConfig{})};
  });
}

ks_status ks_service_handle(const ks_service* service, const char* line, char** response) {
  KS_REQUIRE(service && line && response);
  return guarded([&] { *response = copy_string(service->service.handle(line)); });
}

ks_status ks_service_serve_stdio(const ks_service* service, size_t* answered) {
  KS_REQUIRE(service);
  return guarded([&] {
    const std::size_t n = service->service.serve(std::cin, std::cout);
    if (answered) *answered = n;
  });
}

void ks_service_destroy(ks_service* service) { delete service; }

ks_status ks_tcp_server_start(const ks_service* service, const char* host, uint16_t port, ks_tcp_server** out) {
  KS_REQUIRE(service && out);
  return guarded([&] { *out = new ks_tcp_server{{service->service, port, host ? host : "127.0.0.1"}}; });
}

uint16_t ks_tcp_server_port(const ks_tcp_server* server) { return server ? server->server.port() : 0; }
void ks_tcp_server_wait(ks_tcp_server* server) {
  if (server) server->server.wait();
}
void ks_tcp_server_stop(ks_tcp_server* server) {
  if (server) server->server.stop();
}
void ks_tcp_server_destroy(ks_tcp_server* server) { delete server; }

ks_status ks_scenario_load(const char* path, ks_scenario** out) {
  KS_REQUIRE(path && out);
  return guarded([&] { *out = new ks_scenario{keystone::load_scenario(path)}; });
}

ks_status ks_scenario_parse(const char* text, ks_scenario** out) {
  KS_REQUIRE(text && out);
  return guarded([&] { *out = new ks_scenario{keystone::parse_scenario(text)}; });
}

size_t ks_scenario_policy_count(const ks_scenario* scenario) {
  return scenario ? scenario->scenario.policies.size() : 0;
}

const char* ks_scenario_policy_name(const ks_scenario* scenario, size_t index) {
  if (!scenario || index >= scenario->scenario.policies.size()) return nullptr;
  return scenario->scenario.policies[index].name.c_str();
}

void ks_scenario_destroy(ks_scenario* scenario) { delete scenario; }

ks_status ks_simulate(const ks_scenario* scenario, const char* policy, const ks_run_options* options, char** table) {
  KS_REQUIRE(scenario && table);
  return guarded([&] {
    const auto& s = scenario->scenario;
    const RunParams run = run_params(s, options);
    std::vector<keystone::SweepRow> rows;
    for (const auto& p : s.policies) {
      if (policy && p.name != policy) continue;
      rows.push_back({p.name, p,
                      keystone::estimate_success(s.episode, p, run.episodes, run.repeats, run.seed, run.threads)});
    }
    if (policy && rows.empty()) s.policy(policy);  // throws with the unknown name
    *table = copy_string(keystone::format_results_table(rows));
  });
}

ks_status ks_sweep(const ks_scenario* scenario, const char* base_policy, const ks_metric* metrics,
                   size_t metric_count, const size_t* k_values, size_t k_count, const size_t* c_values,
                   size_t c_count, const ks_run_options* options, char** table) {
  KS_REQUIRE(scenario && base_policy && table);
  KS_REQUIRE(metrics || metric_count == 0);
  KS_REQUIRE(k_values || k_count == 0);
  KS_REQUIRE(c_values || c_count == 0);
  return guarded([&] {
    const auto& s = scenario->scenario;
    keystone::SweepAxes axes;
    for (size_t i = 0; i < metric_count; ++i) {
      axes.metrics.push_back(metrics[i] == KS_METRIC_COSINE ? keystone::Metric::kCosine
                                                            : keystone::Metric::kEuclidean);
    }
    axes.k_values.assign(k_values, k_values + k_count);
    axes.c_values.assign(c_values, c_values + c_count);
    const RunParams run = run_params(s, options);
    const auto rows = keystone::ablation_sweep(s.episode, s.policy(base_policy), axes, run.episodes, run.repeats,
                                               run.seed, run.threads);
    *table = copy_string(keystone::format_results_table(rows));
  });
}

}  // extern "C"
