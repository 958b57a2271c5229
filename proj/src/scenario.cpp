#include "keystone/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "keystone/number_format.hpp"

namespace keystone {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& node, const char* key, T fallback) {
  const auto it = node.find(key);
  if (it == node.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParseError, std::string("scenario field '") + key + "' has the wrong type");
  }
}

RoundModel parse_round(const json& node, std::size_t dimension, std::size_t chunk_steps) {
  if (!node.is_object() || !node.contains("modes") || !node["modes"].is_array()) {
    throw Error(ErrorCode::kParseError, "round model needs a 'modes' array");
  }
  RoundModel round;
  round.dimension = dimension;
  round.chunk_steps = chunk_steps;
  for (const auto& m : node["modes"]) {
    ModeSpec mode;
    mode.center = field<std::vector<double>>(m, "center", {});
    mode.spread = field<double>(m, "spread", 0.0);
    mode.weight = field<double>(m, "weight", 1.0);
    mode.success = field<bool>(m, "success", true);
    round.modes.push_back(std::move(mode));
  }
  return round;
}

Policy parse_policy(const json& node) {
  const auto type = field<std::string>(node, "type", "keystone");
  Policy policy;
  if (type == "single_sample") {
    policy = Policy::single_sample();
  } else if (type == "keystone") {
    SelectorConfig config;
    config.num_clusters = field<std::size_t>(node, "clusters", config.num_clusters);
    config.tau = field<double>(node, "tau", config.tau);
    config.eps = field<double>(node, "eps", config.eps);
    config.metric = parse_metric(field<std::string>(node, "metric", "euclidean"));
    config.max_iterations = field<std::size_t>(node, "max_iterations", config.max_iterations);
    policy = Policy::keystone(field<std::size_t>(node, "samples", 16), config);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown policy type '" + type + "'");
  }
  policy.name = field<std::string>(node, "name", policy.name);
  policy.validate();
  return policy;
}

json dump_round(const RoundModel& round) {
  json modes = json::array();
  for (const auto& m : round.modes) {
    modes.push_back({{"center", m.center}, {"spread", m.spread}, {"weight", m.weight}, {"success", m.success}});
  }
  return {{"modes", modes}};
}

}  // namespace

const Policy& Scenario::policy(std::string_view name) const {
  for (const auto& p : policies) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::kInvalidConfig, "scenario has no policy named '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "scenario must be a JSON object");

  Scenario scenario;
  scenario.episode.name = field<std::string>(doc, "name", "scenario");
  const auto dimension = field<std::size_t>(doc, "dimension", 0);
  const auto chunk_steps = field<std::size_t>(doc, "chunk_steps", 1);
  if (doc.contains("round_models")) {
    for (const auto& r : doc["round_models"]) {
      scenario.episode.rounds.push_back(parse_round(r, dimension, chunk_steps));
    }
  } else if (doc.contains("round")) {
    const RoundModel round = parse_round(doc["round"], dimension, chunk_steps);
    scenario.episode.rounds.assign(field<std::size_t>(doc, "rounds", 1), round);
  } else {
    throw Error(ErrorCode::kParseError, "scenario needs 'round' or 'round_models'");
  }
  scenario.episode.validate();

  if (doc.contains("policies")) {
    for (const auto& p : doc["policies"]) scenario.policies.push_back(parse_policy(p));
  } else {
    scenario.policies = {Policy::single_sample(), Policy::keystone(16)};
  }
  scenario.episodes = field<std::size_t>(doc, "episodes", scenario.episodes);
  scenario.repeats = field<std::size_t>(doc, "repeats", scenario.repeats);
  scenario.seed = field<std::uint64_t>(doc, "seed", scenario.seed);
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scenario '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string dump_scenario(const Scenario& scenario) {
  const auto& rounds = scenario.episode.rounds;
  json doc = {{"name", scenario.episode.name},
              {"dimension", rounds.front().dimension},
              {"chunk_steps", rounds.front().chunk_steps}};
  doc["round_models"] = json::array();
  for (const auto& r : rounds) doc["round_models"].push_back(dump_round(r));
  doc["policies"] = json::array();
  for (const auto& p : scenario.policies) {
    if (p.kind == Policy::Kind::kSingleSample) {
      doc["policies"].push_back({{"name", p.name}, {"type", "single_sample"}});
    } else {
      doc["policies"].push_back({{"name", p.name},
                                 {"type", "keystone"},
                                 {"samples", p.samples},
                                 {"clusters", p.selector.num_clusters},
                                 {"tau", p.selector.tau},
                                 {"eps", p.selector.eps},
                                 {"metric", to_string(p.selector.metric)},
                                 {"max_iterations", p.selector.max_iterations}});
    }
  }
  doc["episodes"] = scenario.episodes;
  doc["repeats"] = scenario.repeats;
  doc["seed"] = scenario.seed;
  return doc.dump(2);
}

std::string format_results_table(const std::vector<SweepRow>& rows) {
  std::string out = "config_id,metric,K,C,tau,mean,std\n";
  for (const auto& row : rows) {
    const Policy& p = row.policy;
    out += row.config_id;
    if (p.kind == Policy::Kind::kSingleSample) {
      out += ",-,1,-,-,";
    } else {
      out += ",";
      out += to_string(p.selector.metric);
      out += "," + std::to_string(p.samples) + "," + std::to_string(p.selector.num_clusters) + ",";
      out += format_double(p.selector.tau) + ",";
    }
    out += format_double(row.stats.mean_success) + "," + format_double(row.stats.std_success) + "\n";
  }
  return out;
}

}  // namespace keystone
