#include "keystone/protocol.hpp"

#include <istream>
#include <ostream>

namespace keystone {

using nlohmann::json;

namespace {

SelectorConfig apply_overrides(SelectorConfig config, const json& overrides) {
  if (!overrides.is_object()) throw Error(ErrorCode::kInvalidConfig, "'config' must be an object");
  for (const auto& [key, value] : overrides.items()) {
    try {
      if (key == "clusters") {
        config.num_clusters = value.get<std::size_t>();
      } else if (key == "tau") {
        config.tau = value.get<double>();
      } else if (key == "eps") {
        config.eps = value.get<double>();
      } else if (key == "metric") {
        config.metric = parse_metric(value.get<std::string>());
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "max_iterations") {
        config.max_iterations = value.get<std::size_t>();
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
      }
    } catch (const json::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "config key '" + key + "' has the wrong type");
    }
  }
  config.validate();
  return config;
}

}  // namespace

Request parse_request(std::string_view line, const SelectorConfig& defaults) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    // Includes numbers that overflow a double.
    throw RequestError("parse_error", std::string("request is not valid JSON: ") + e.what(), std::nullopt);
  }
  if (!doc.is_object()) throw RequestError("parse_error", "request must be a JSON object", std::nullopt);

  std::optional<std::string> id;
  if (auto it = doc.find("id"); it != doc.end() && it->is_string() && !it->get<std::string>().empty()) {
    id = it->get<std::string>();
  } else {
    throw RequestError("parse_error", "request needs a nonempty string 'id'", std::nullopt);
  }
  const auto candidates = doc.find("candidates");
  if (candidates == doc.end()) throw RequestError("parse_error", "request needs 'candidates'", id);

  std::vector<std::vector<std::vector<double>>> nested;
  try {
    nested = candidates->get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const json::exception&) {
    throw RequestError("parse_error", "'candidates' must be a K x T x A numeric array", id);
  }
  try {
    SelectorConfig config = defaults;
    if (auto it = doc.find("config"); it != doc.end() && !it->is_null()) config = apply_overrides(config, *it);
    return Request{*id, validate_batch(nested), config};
  } catch (const Error& e) {
    throw RequestError(std::string(to_string(e.code())), e.what(), id);
  }
}

json request_json(const std::string& id, const CandidateBatch& batch, const json& overrides) {
  json candidates = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json rows = json::array();
    const auto x = batch.flat(i);
    for (std::size_t t = 0; t < batch.steps(); ++t) {
      rows.push_back(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(t * batch.dims()),
                                         x.begin() + static_cast<std::ptrdiff_t>((t + 1) * batch.dims())));
    }
    candidates.push_back(std::move(rows));
  }
  json doc = {{"id", id}, {"candidates", std::move(candidates)}};
  if (!overrides.empty()) doc["config"] = overrides;
  return doc;
}

json response_json(const std::string& id, const CandidateBatch& batch, const SelectionResult& result) {
  const ActionChunk chunk = batch.chunk(result.selected_index);
  json rows = json::array();
  for (std::size_t t = 0; t < chunk.steps(); ++t) {
    json row = json::array();
    for (std::size_t a = 0; a < chunk.dims(); ++a) row.push_back(chunk.at(t, a));
    rows.push_back(std::move(row));
  }
  json diagnostics = {{"s", result.guard_score},
                      {"unimodal", result.unimodal},
                      {"cluster_sizes", result.cluster_sizes},
                      {"global_medoid", result.global_medoid},
                      {"fell_back", result.fell_back},
                      {"selected_cluster", nullptr}};
  if (result.selected_cluster) diagnostics["selected_cluster"] = *result.selected_cluster;
  if (result.assignment) {
    diagnostics["labels"] = result.assignment->labels;
    diagnostics["iterations"] = result.assignment->iterations_run;
    diagnostics["converged"] = result.assignment->converged;
  }
  return {{"id", id},
          {"selected_index", result.selected_index},
          {"selected_chunk", std::move(rows)},
          {"diagnostics", std::move(diagnostics)}};
}

json error_json(const std::optional<std::string>& id, std::string_view code, std::string_view message) {
  json doc = {{"id", nullptr}, {"error", {{"code", code}, {"message", message}}}};
  if (id) doc["id"] = *id;
  return doc;
}

std::string handle_request(std::string_view line, const SelectorConfig& defaults) {
  // Invalid UTF-8 in a message must not make dump() throw.
  constexpr auto kDump = [](const json& doc) { return doc.dump(-1, ' ', false, json::error_handler_t::replace); };
  std::optional<std::string> id;
  try {
    Request request = parse_request(line, defaults);
    id = request.id;
    const SelectionResult result = select(request.batch, request.config);
    return kDump(response_json(request.id, request.batch, result));
  } catch (const RequestError& e) {
    return kDump(error_json(e.id(), e.code(), e.what()));
  } catch (const Error& e) {
    return kDump(error_json(id, to_string(e.code()), e.what()));
  } catch (const std::exception& e) {
    return kDump(error_json(id, "internal", e.what()));
  }
}

std::size_t Service::serve(std::istream& in, std::ostream& out) const {
  std::size_t answered = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << handle(line) << '\n' << std::flush;
    ++answered;
  }
  return answered;
}

}  // namespace keystone
