/*
 * C interface to the keystone consensus selector.
 *
 * Every handle is opaque and owned by the caller; release it with the
 * matching *_destroy function. Functions returning ks_status report failures
 * through the status code, and ks_last_error() holds a readable message for
 * the most recent failure on the calling thread. Strings handed out through
 * `char**` parameters are released with ks_string_free().
 */
#ifndef KEYSTONE_H
#define KEYSTONE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KS_API __declspec(dllexport)
#else
#define KS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ks_status {
  KS_OK = 0,
  KS_ERR_INVALID_ARGUMENT = 1,
  KS_ERR_SHAPE_MISMATCH = 2,
  KS_ERR_NON_FINITE_VALUE = 3,
  KS_ERR_EMPTY_BATCH = 4,
  KS_ERR_DEGENERATE_INPUT = 5,
  KS_ERR_INSUFFICIENT_CANDIDATES = 6,
  KS_ERR_INVALID_CONFIG = 7,
  KS_ERR_PARSE = 8,
  KS_ERR_ROW_COUNT_MISMATCH = 9,
  KS_ERR_IO = 10,
  KS_ERR_INTERNAL = 11
} ks_status;

typedef enum ks_metric { KS_METRIC_EUCLIDEAN = 0, KS_METRIC_COSINE = 1 } ks_metric;

typedef enum ks_batch_format {
  KS_FORMAT_GUESS = -1, /* by file extension */
  KS_FORMAT_STRUCTURED = 0,
  KS_FORMAT_DELIMITED = 1
} ks_batch_format;

typedef struct ks_config {
  size_t num_clusters;
  double tau;
  double eps;
  ks_metric metric;
  uint64_t seed;
  size_t max_iterations;
} ks_config;

/* Simulation run parameters. Zero episodes/repeats take the scenario's values. */
typedef struct ks_run_options {
  size_t episodes;
  size_t repeats;
  uint64_t seed;
  int use_scenario_seed;
  unsigned threads; /* 0: one per hardware thread */
} ks_run_options;

typedef struct ks_batch ks_batch;
typedef struct ks_result ks_result;
typedef struct ks_service ks_service;
typedef struct ks_tcp_server ks_tcp_server;
typedef struct ks_scenario ks_scenario;

KS_API const char* ks_version(void);
KS_API const char* ks_last_error(void);
KS_API const char* ks_status_name(ks_status status);
KS_API void ks_string_free(char* str);

KS_API ks_config ks_config_default(void);
KS_API ks_run_options ks_run_options_default(void);
KS_API ks_status ks_metric_from_name(const char* name, ks_metric* out);
KS_API ks_status ks_format_from_name(const char* name, ks_batch_format* out);

/* values: count * steps * dims doubles, candidate-major then step-major. */
KS_API ks_status ks_batch_create(const double* values, size_t count, size_t steps, size_t dims, ks_batch** out);
KS_API ks_status ks_batch_load(const char* path, ks_batch_format format, ks_batch** out);
KS_API ks_status ks_batch_save(const ks_batch* batch, const char* path, ks_batch_format format);
/* Keeps the first `count` candidates (1 <= count <= size). */
KS_API ks_status ks_batch_truncate(ks_batch* batch, size_t count);
KS_API size_t ks_batch_size(const ks_batch* batch);
KS_API size_t ks_batch_steps(const ks_batch* batch);
KS_API size_t ks_batch_dims(const ks_batch* batch);
KS_API const double* ks_batch_data(const ks_batch* batch);
KS_API void ks_batch_destroy(ks_batch* batch);

KS_API ks_status ks_select(const ks_batch* batch, const ks_config* config, ks_result** out);
KS_API size_t ks_result_selected_index(const ks_result* result);
KS_API double ks_result_guard_score(const ks_result* result);
KS_API int ks_result_unimodal(const ks_result* result);
KS_API int ks_result_fell_back(const ks_result* result);
KS_API size_t ks_result_global_medoid(const ks_result* result);
/* Number of clusters reported (0 on the unimodal path). Copies up to
 * `capacity` sizes into `sizes` when it is non-null. */
KS_API size_t ks_result_cluster_sizes(const ks_result* result, size_t* sizes, size_t capacity);
/* Response record for `result`, identical to what the service sends. */
KS_API ks_status ks_result_to_json(const ks_result* result, const ks_batch* batch, const char* id, char** out);
KS_API void ks_result_destroy(ks_result* result);

KS_API ks_status ks_service_create(const ks_config* defaults, ks_service** out);
/* Never fails on bad input: malformed lines produce an error response. */
KS_API ks_status ks_service_handle(const ks_service* service, const char* line, char** response);
/* Serves stdin to stdout until end of input. */
KS_API ks_status ks_service_serve_stdio(const ks_service* service, size_t* answered);
KS_API void ks_service_destroy(ks_service* service);

KS_API ks_status ks_tcp_server_start(const ks_service* service, const char* host, uint16_t port,
                                     ks_tcp_server** out);
KS_API uint16_t ks_tcp_server_port(const ks_tcp_server* server);
KS_API void ks_tcp_server_wait(ks_tcp_server* server);
KS_API void ks_tcp_server_stop(ks_tcp_server* server);
KS_API void ks_tcp_server_destroy(ks_tcp_server* server);

KS_API ks_status ks_scenario_load(const char* path, ks_scenario** out);
KS_API ks_status ks_scenario_parse(const char* text, ks_scenario** out);
KS_API size_t ks_scenario_policy_count(const ks_scenario* scenario);
KS_API const char* ks_scenario_policy_name(const ks_scenario* scenario, size_t index);
KS_API void ks_scenario_destroy(ks_scenario* scenario);

/* Runs one named policy, or every scenario policy when `policy` is NULL, and
 * writes the results table (config_id,metric,K,C,tau,mean,std). */
KS_API ks_status ks_simulate(const ks_scenario* scenario, const char* policy, const ks_run_options* options,
                             char** table);
/* One-at-a-time ablation around the named keystone policy. */
KS_API ks_status ks_sweep(const ks_scenario* scenario, const char* base_policy, const ks_metric* metrics,
                          size_t metric_count, const size_t* k_values, size_t k_count, const size_t* c_values,
                          size_t c_count, const ks_run_options* options, char** table);

#ifdef __cplusplus
}
#endif

#endif /* KEYSTONE_H */
