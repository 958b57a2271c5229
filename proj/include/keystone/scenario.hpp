#pragma once

// Scenario documents (JSON key/value text) and the delimiter-separated
// result tables written by `simulate` and `sweep`.
//
//   {
//     "name": "planted",
//     "dimension": 8, "chunk_steps": 2,
//     "rounds": 10,                       // T copies of "round", or
//     "round": {"modes": [{"center": [...], "spread": 0.1,
//                          "weight": 0.7, "success": true}, ...]},
//     "round_models": [ {"modes": [...]}, ... ],   // explicit rounds
//     "policies": [{"name": "single", "type": "single_sample"},
//                  {"name": "ks16", "type": "keystone", "samples": 16,
//                   "clusters": 2, "tau": 0.3, "eps": 1e-8,
//                   "metric": "euclidean"}],
//     "episodes": 1000, "repeats": 5, "seed": 1
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keystone/rollout.hpp"

namespace keystone {

struct Scenario {
  EpisodeModel episode;
  std::vector<Policy> policies;
  std::size_t episodes = 1000;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;

  /// Throws kInvalidConfig when no policy carries that name.
  const Policy& policy(std::string_view name) const;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);

/// Header `config_id,metric,K,C,tau,mean,std`; single-sample rows leave the
/// selector columns as `-`.
std::string format_results_table(const std::vector<SweepRow>& rows);

}  // namespace keystone
