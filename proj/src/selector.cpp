#include "keystone/selector.hpp"

#include <cmath>
#include <string>

namespace keystone {

void SelectorConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::kInvalidConfig, "tau must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::kInvalidConfig, "eps must be positive");
  if (num_clusters < 2) throw Error(ErrorCode::kInvalidConfig, "num_clusters must be at least 2");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be at least 1");
}

CandidateBatch validate_batch(std::size_t count, std::size_t steps, std::size_t dims, std::vector<double> values) {
  return CandidateBatch(count, steps, dims, std::move(values));
}

CandidateBatch validate_batch(const std::vector<std::vector<std::vector<double>>>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyBatch, "candidate batch is empty");
  std::vector<ActionChunk> chunks;
  chunks.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      chunks.push_back(ActionChunk::from_rows(candidates[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "candidate " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return CandidateBatch(chunks);
}

SelectionResult select(const CandidateBatch& batch, const SelectorConfig& config) {
  config.validate();
  SelectionResult result;
  if (batch.size() == 1) return result;

  const DistanceMatrix dm = pairwise_distances(batch, config.metric);
  const GuardScore guard = unimodality_score(batch, dm, config.eps);
  result.guard_score = guard.score;
  result.global_medoid = guard.medoid;
  result.selected_index = guard.medoid;
  if (guard.score < config.tau) return result;

  result.unimodal = false;
  if (batch.size() < config.num_clusters) {
    result.fell_back = true;
    return result;
  }

  ClusterConfig cluster_config;
  cluster_config.num_clusters = config.num_clusters;
  cluster_config.max_iterations = config.max_iterations;
  cluster_config.seed = config.seed;
  cluster_config.metric = config.metric;
  ClusterAssignment assignment = kmeans(batch, cluster_config);

  const std::size_t chosen = largest_cluster(assignment, dm);
  const auto members = assignment.members(chosen);
  result.selected_index = cluster_medoid(dm, members);
  result.cluster_sizes = assignment.cluster_sizes();
  result.selected_cluster = chosen;
  result.assignment = std::move(assignment);
  return result;
}

}  // namespace keystone
