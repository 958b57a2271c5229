#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "keystone/keystone.h"

namespace {

using nlohmann::json;

TEST(CApi, SelectHandTrace) {
  const double values[] = {0, 0.1, 0.2, 5.0};
  ks_batch* batch = nullptr;
  ASSERT_EQ(ks_batch_create(values, 4, 1, 1, &batch), KS_OK);
  ks_result* result = nullptr;
  const ks_config config = ks_config_default();
  ASSERT_EQ(ks_select(batch, &config, &result), KS_OK);
  EXPECT_EQ(ks_result_selected_index(result), 1u);
  EXPECT_EQ(ks_result_unimodal(result), 0);
  EXPECT_EQ(ks_result_global_medoid(result), 1u);
  EXPECT_NEAR(ks_result_guard_score(result), 0.49, 1e-8);
  size_t sizes[4] = {};
  ASSERT_EQ(ks_result_cluster_sizes(result, sizes, 4), 2u);
  EXPECT_EQ(sizes[0] + sizes[1], 4u);

  char* text = nullptr;
  ASSERT_EQ(ks_result_to_json(result, batch, "x", &text), KS_OK);
  EXPECT_EQ(json::parse(text)["selected_chunk"], json::parse("[[0.1]]"));
  ks_string_free(text);
  ks_result_destroy(result);

  ASSERT_EQ(ks_batch_truncate(batch, 3), KS_OK);
  EXPECT_EQ(ks_batch_size(batch), 3u);
  EXPECT_EQ(ks_batch_truncate(batch, 0), KS_ERR_INVALID_ARGUMENT);
  ks_batch_destroy(batch);
}

TEST(CApi, StatusCodesAndMessages) {
  const double bad[] = {1.0, NAN};
  ks_batch* batch = nullptr;
  EXPECT_EQ(ks_batch_create(bad, 2, 1, 1, &batch), KS_ERR_NON_FINITE_VALUE);
  EXPECT_NE(std::string(ks_last_error()).find("candidate 1"), std::string::npos);
  EXPECT_EQ(ks_batch_create(bad, 0, 1, 1, &batch), KS_ERR_EMPTY_BATCH);
  EXPECT_EQ(ks_batch_create(nullptr, 1, 1, 1, nullptr), KS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ks_batch_load("/no/such/file.csv", KS_FORMAT_GUESS, &batch), KS_ERR_IO);

  const double ok[] = {1.0, 2.0};
  ASSERT_EQ(ks_batch_create(ok, 2, 1, 1, &batch), KS_OK);
  ks_config config = ks_config_default();
  config.tau = 0;
  ks_result* result = nullptr;
  EXPECT_EQ(ks_select(batch, &config, &result), KS_ERR_INVALID_CONFIG);
  EXPECT_STREQ(ks_status_name(KS_ERR_INVALID_CONFIG), "invalid_config");
  ks_metric metric{};
  EXPECT_EQ(ks_metric_from_name("cosine", &metric), KS_OK);
  EXPECT_EQ(metric, KS_METRIC_COSINE);
  EXPECT_EQ(ks_metric_from_name("nope", &metric), KS_ERR_INVALID_CONFIG);
  ks_batch_destroy(batch);
}

TEST(CApi, ServiceHandle) {
  ks_service* service = nullptr;
  ASSERT_EQ(ks_service_create(nullptr, &service), KS_OK);
  char* response = nullptr;
  ASSERT_EQ(ks_service_handle(service, "garbage", &response), KS_OK);
  EXPECT_EQ(json::parse(response)["error"]["code"], "parse_error");
  ks_string_free(response);
  ASSERT_EQ(ks_service_handle(service, R"({"id":"a","candidates":[[[0]],[[1]],[[2]]]})", &response), KS_OK);
  EXPECT_EQ(json::parse(response)["selected_index"], 1);
  ks_string_free(response);

  ks_tcp_server* server = nullptr;
  ASSERT_EQ(ks_tcp_server_start(service, "127.0.0.1", 0, &server), KS_OK);
  EXPECT_NE(ks_tcp_server_port(server), 0);
  ks_tcp_server_stop(server);
  ks_tcp_server_wait(server);
  ks_tcp_server_destroy(server);
  ks_service_destroy(service);
}

TEST(CApi, ScenarioSimulateAndSweep) {
  const char* text = R"({
    "name": "tiny", "dimension": 2, "rounds": 3,
    "round": {"modes": [
      {"center": [0, 0], "spread": 0.1, "weight": 0.8, "success": true},
      {"center": [20, 20], "spread": 0.05, "weight": 0.2, "success": false}]},
    "policies": [{"name": "single", "type": "single_sample"},
                 {"name": "ks", "type": "keystone", "samples": 8}],
    "episodes": 200, "repeats": 2, "seed": 4
  })";
  ks_scenario* scenario = nullptr;
  ASSERT_EQ(ks_scenario_parse(text, &scenario), KS_OK);
  ASSERT_EQ(ks_scenario_policy_count(scenario), 2u);
  EXPECT_STREQ(ks_scenario_policy_name(scenario, 1), "ks");

  char* table = nullptr;
  ASSERT_EQ(ks_simulate(scenario, nullptr, nullptr, &table), KS_OK);
  const std::string all(table);
  ks_string_free(table);
  EXPECT_EQ(all.substr(0, all.find('\n')), "config_id,metric,K,C,tau,mean,std");
  EXPECT_NE(all.find("\nsingle,-,1,-,-,"), std::string::npos);
  EXPECT_NE(all.find("\nks,euclidean,8,2,0.3,"), std::string::npos);

  EXPECT_EQ(ks_simulate(scenario, "missing", nullptr, &table), KS_ERR_INVALID_CONFIG);

  const size_t ks[] = {1, 4};
  const ks_metric metrics[] = {KS_METRIC_COSINE};
  ASSERT_EQ(ks_sweep(scenario, "ks", metrics, 1, ks, 2, nullptr, 0, nullptr, &table), KS_OK);
  const std::string sweep(table);
  ks_string_free(table);
  EXPECT_NE(sweep.find("\nmetric=cosine,cosine,8,2,"), std::string::npos);
  EXPECT_NE(sweep.find("\nK=4,euclidean,4,2,"), std::string::npos);
  ks_scenario_destroy(scenario);

  EXPECT_EQ(ks_scenario_parse("{\"dimension\": 2}", &scenario), KS_ERR_PARSE);
}

// CLI binary, exercised as a subprocess.

std::string cli() { return KEYSTONE_CLI_PATH; }

int run(const std::string& args, std::string* out = nullptr) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto out_path = dir / "keystone_cli_stdout.txt";
  const std::string command = cli() + " " + args + " > " + out_path.string() + " 2>/dev/null";
  const int status = std::system(command.c_str());
  if (out) {
    std::ifstream in(out_path);
    out->assign(std::istreambuf_iterator<char>(in), {});
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "keystone_cli_test";
    std::filesystem::create_directories(dir_);
    std::ofstream(dir_ / "batch.csv") << "4,1,1\n0\n0.1\n0.2\n5.0\n";
    std::ofstream(dir_ / "bad.csv") << "2,1,1\n0.5\n";
    std::ofstream(dir_ / "scenario.json") << R"({
      "dimension": 2, "rounds": 2,
      "round": {"modes": [{"center": [0, 0], "spread": 0.1, "weight": 0.8, "success": true},
                          {"center": [9, 9], "spread": 0.05, "weight": 0.2, "success": false}]},
      "policies": [{"name": "single", "type": "single_sample"}, {"name": "ks", "type": "keystone", "samples": 8}],
      "episodes": 100, "repeats": 2})";
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

TEST_F(CliTest, SelectPrintsDiagnostics) {
  std::string out;
  ASSERT_EQ(run("select --input " + path("batch.csv") + " --tau 0.3 --seed 7", &out), 0);
  const json result = json::parse(out);
  EXPECT_EQ(result["selected_index"], 1);
  EXPECT_EQ(result["diagnostics"]["unimodal"], false);

  ASSERT_EQ(run("select --input " + path("batch.csv") + " --k-override 3 --output " + path("out.json")), 0);
  std::ifstream in(path("out.json"));
  EXPECT_EQ(json::parse(in)["selected_index"], 1);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("select --input " + path("missing.csv")), 2);
  EXPECT_EQ(run("select --input " + path("bad.csv")), 2);
  EXPECT_EQ(run("select"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("select --input " + path("batch.csv") + " --metric taxicab"), 1);
  EXPECT_EQ(run("select --input " + path("batch.csv") + " --tau -1"), 1);
}

TEST_F(CliTest, SimulateSweepServeBench) {
  std::string out;
  ASSERT_EQ(run("simulate --scenario " + path("scenario.json") + " --seed 3", &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "config_id,metric,K,C,tau,mean,std");
  std::string again;
  ASSERT_EQ(run("simulate --scenario " + path("scenario.json") + " --seed 3", &again), 0);
  EXPECT_EQ(out, again);

  ASSERT_EQ(run("sweep --scenario " + path("scenario.json") + " --k-values 1,4 --c-values 3", &out), 0);
  EXPECT_NE(out.find("K=4"), std::string::npos);
  EXPECT_NE(out.find("C=3"), std::string::npos);

  std::ofstream(path("requests.txt")) << "junk\n" << R"({"id":"z","candidates":[[[0]],[[1]],[[2]]]})" << "\n";
  ASSERT_EQ(run("serve --transport stdio < " + path("requests.txt"), &out), 0);
  const auto nl = out.find('\n');
  EXPECT_EQ(json::parse(out.substr(0, nl))["error"]["code"], "parse_error");
  EXPECT_EQ(json::parse(out.substr(nl + 1))["id"], "z");

  ASSERT_EQ(run("bench --k-list 4,16 --dim-list 8 --iterations 20 --warmup 2", &out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "K,D,iterations,mean_us,p50_us,p99_us,max_us");
  EXPECT_NE(out.find("\n16,8,20,"), std::string::npos);
}

}  // namespace
