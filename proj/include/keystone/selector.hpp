#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "keystone/clustering.hpp"
#include "keystone/geometry.hpp"

namespace keystone {

struct SelectorConfig {
  std::size_t num_clusters = 2;
  double tau = 0.3;
  double eps = 1e-8;
  Metric metric = Metric::kEuclidean;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 10;

  void validate() const;
  friend bool operator==(const SelectorConfig&, const SelectorConfig&) = default;
};

struct SelectionResult {
  std::size_t selected_index = 0;
  double guard_score = 0.0;
  bool unimodal = true;
  std::size_t global_medoid = 0;
  /// Empty unless the clustering path ran.
  std::vector<std::size_t> cluster_sizes;
  std::optional<ClusterAssignment> assignment;
  std::optional<std::size_t> selected_cluster;
  /// Guard failed but K < C, so the global medoid was returned.
  bool fell_back = false;
};

/// Builds a batch from K x T x A values laid out candidate-major, reporting
/// the first violation (empty batch, shape mismatch, non-finite value).
CandidateBatch validate_batch(std::size_t count, std::size_t steps, std::size_t dims, std::vector<double> values);
/// Nested form: candidates[i][t][a].
CandidateBatch validate_batch(const std::vector<std::vector<std::vector<double>>>& candidates);

/// Consensus selection: the global medoid when the guard says the batch is
/// unimodal (s < tau), otherwise the medoid of the largest k-means cluster.
/// The selected chunk is always one of the inputs.
SelectionResult select(const CandidateBatch& batch, const SelectorConfig& config = {});

}  // namespace keystone
