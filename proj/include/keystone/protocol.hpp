#pragma once

// Line-delimited selection service. One JSON record per line each way.
//
// request:  {"id": "r1", "candidates": [[[0.0]], [[0.1]]], "config": {"tau": 0.5}}
// response: {"id": "r1", "selected_index": 1, "selected_chunk": [[0.1]],
//            "diagnostics": {"s": ..., "unimodal": ..., "cluster_sizes": [...],
//                            "global_medoid": ..., "fell_back": ...,
//                            "selected_cluster": ..., "labels": [...]}}
// failure:  {"id": "r1" | null, "error": {"code": "parse_error", "message": "..."}}
//
// Config overrides: clusters, tau, eps, metric, seed, max_iterations.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "keystone/selector.hpp"

namespace keystone {

struct Request {
  std::string id;
  CandidateBatch batch;
  SelectorConfig config;
};

/// Thrown by parse_request; carries the request id when it could be read.
class RequestError : public std::runtime_error {
 public:
  RequestError(std::string code, const std::string& message, std::optional<std::string> id)
      : std::runtime_error(message), code_(std::move(code)), id_(std::move(id)) {}
  const std::string& code() const noexcept { return code_; }
  const std::optional<std::string>& id() const noexcept { return id_; }

 private:
  std::string code_;
  std::optional<std::string> id_;
};

Request parse_request(std::string_view line, const SelectorConfig& defaults);
nlohmann::json request_json(const std::string& id, const CandidateBatch& batch,
                            const nlohmann::json& overrides = nlohmann::json::object());

nlohmann::json response_json(const std::string& id, const CandidateBatch& batch, const SelectionResult& result);
nlohmann::json error_json(const std::optional<std::string>& id, std::string_view code, std::string_view message);

/// Never throws: every failure becomes an error response line (no newline).
std::string handle_request(std::string_view line, const SelectorConfig& defaults = {});

class Service {
 public:
  explicit Service(SelectorConfig defaults = {}) : defaults_(defaults) { defaults_.validate(); }

  std::string handle(std::string_view line) const { return handle_request(line, defaults_); }
  /// Answers each input line in order until end of input. Blank lines are
  /// skipped. Returns the number of responses written.
  std::size_t serve(std::istream& in, std::ostream& out) const;
  const SelectorConfig& defaults() const noexcept { return defaults_; }

 private:
  SelectorConfig defaults_;
};

}  // namespace keystone
